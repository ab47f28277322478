#include "lscd/core/split.hpp"

#include <algorithm>
#include <cmath>

#include "lscd/core/error.hpp"

namespace lscd {

SplitStrategy parse_split_strategy(const std::string& name) {
  if (name == "uniform-random") return SplitStrategy::uniform_random;
  if (name == "per-sample-ratio") return SplitStrategy::per_sample_ratio;
  throw ValueError("unknown split strategy: " + name);
}

std::string to_string(SplitStrategy s) {
  return s == SplitStrategy::uniform_random ? "uniform-random" : "per-sample-ratio";
}

ConditionalSplit make_conditional_split(const TimeSeriesBatch& batch, SplitStrategy strategy, double ratio,
                                        Rng& rng) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ValueError("make_conditional_split: ratio must lie in [0, 1]");
  const Shape3& s = batch.shape();
  ConditionalSplit split;
  split.cond_mask = Mask(s);
  split.target_mask = Mask(s);
  split.empty_sample.assign(s.batch, 0);

  std::vector<std::size_t> observed;
  for (std::size_t b = 0; b < s.batch; ++b) {
    observed.clear();
    for (std::size_t k = 0; k < s.channels; ++k)
      for (std::size_t l = 0; l < s.steps; ++l)
        if (batch.obs_mask(b, k, l)) observed.push_back(batch.obs_mask.index(b, k, l));
    if (observed.empty()) {
      split.empty_sample[b] = 1;
      continue;
    }
    for (auto i : observed) split.cond_mask[i] = 1;
    if (strategy == SplitStrategy::uniform_random) {
      for (auto i : observed) {
        if (uniform01(rng) < ratio) {
          split.cond_mask[i] = 0;
          split.target_mask[i] = 1;
        }
      }
    } else {
      const auto n_target = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(observed.size())));
      // Partial Fisher-Yates: the first n_target slots become the target.
      for (std::size_t i = 0; i < n_target; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, observed.size() - 1);
        std::swap(observed[i], observed[pick(rng)]);
        split.cond_mask[observed[i]] = 0;
        split.target_mask[observed[i]] = 1;
      }
    }
  }
  return split;
}

}  // namespace lscd
