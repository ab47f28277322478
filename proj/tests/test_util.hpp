#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "lscd/core/random.hpp"
#include "lscd/core/types.hpp"

namespace lscd::testing {

/// Random batch with irregular increasing timestamps and a random mask.
inline TimeSeriesBatch random_batch(Shape3 s, std::uint64_t seed, double observed_prob = 0.7, double t_span = 10.0) {
  Rng rng(seed);
  Values v(s);
  Mask m(s);
  std::vector<double> t(s.batch * s.steps);
  for (std::size_t b = 0; b < s.batch; ++b) {
    std::vector<double> tb(s.steps);
    for (auto& x : tb) x = t_span * uniform01(rng);
    std::sort(tb.begin(), tb.end());
    for (std::size_t l = 1; l < s.steps; ++l)
      if (tb[l] <= tb[l - 1]) tb[l] = tb[l - 1] + 1e-6;
    std::copy(tb.begin(), tb.end(), t.begin() + b * s.steps);
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = standard_normal(rng);
    m[i] = uniform01(rng) < observed_prob ? 1 : 0;
  }
  return TimeSeriesBatch(std::move(v), std::move(t), std::move(m));
}

/// Overwrite every entry outside `mask` with NaN.
inline Values poison(const Values& v, const Mask& mask) {
  Values out = v;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!mask[i]) out[i] = std::numeric_limits<double>::quiet_NaN();
  return out;
}

inline bool all_finite(const Values& v) {
  return std::all_of(v.data().begin(), v.data().end(), [](double x) { return std::isfinite(x); });
}

}  // namespace lscd::testing
