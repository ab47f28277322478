#include "lscd/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lscd/core/error.hpp"

namespace lscd {

TimeSeriesBatch::TimeSeriesBatch(Values v, std::vector<double> t, Mask m)
    : values(std::move(v)), timestamps(std::move(t)), obs_mask(std::move(m)) {
  validate();
}

void TimeSeriesBatch::validate() const {
  const Shape3& s = values.shape();
  if (!(obs_mask.shape() == s)) throw ShapeError("TimeSeriesBatch: values and obs_mask shapes differ");
  if (timestamps.size() != s.batch * s.steps) throw ShapeError("TimeSeriesBatch: timestamps must be [B, L]");
  for (std::size_t b = 0; b < s.batch; ++b) {
    auto t = times(b);
    for (std::size_t l = 0; l < t.size(); ++l) {
      if (!std::isfinite(t[l])) throw ValueError("TimeSeriesBatch: non-finite timestamp");
      if (l > 0 && !(t[l] > t[l - 1])) throw ValueError("TimeSeriesBatch: timestamps must be strictly increasing");
    }
  }
  for (std::size_t i = 0; i < obs_mask.size(); ++i) {
    if (obs_mask[i] > 1) throw ValueError("TimeSeriesBatch: obs_mask entries must be 0 or 1");
  }
}

TimeSeriesBatch TimeSeriesBatch::slice(std::size_t first, std::size_t count) const {
  if (first + count > batch()) throw ShapeError("TimeSeriesBatch::slice out of range");
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = first + i;
  return select(idx);
}

TimeSeriesBatch TimeSeriesBatch::select(std::span<const std::size_t> samples) const {
  const Shape3 s{samples.size(), channels(), steps()};
  TimeSeriesBatch out;
  out.values = Values(s);
  out.obs_mask = Mask(s);
  out.timestamps.resize(s.batch * s.steps);
  out.meta = meta;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::size_t b = samples[i];
    if (b >= batch()) throw ShapeError("TimeSeriesBatch::select index out of range");
    std::copy_n(timestamps.begin() + b * s.steps, s.steps, out.timestamps.begin() + i * s.steps);
    for (std::size_t k = 0; k < s.channels; ++k) {
      std::ranges::copy(values.row(b, k), out.values.row(i, k).begin());
      std::ranges::copy(obs_mask.row(b, k), out.obs_mask.row(i, k).begin());
    }
  }
  return out;
}

std::size_t TimeSeriesBatch::observed_count() const {
  std::size_t n = 0;
  for (auto m : obs_mask.data()) n += m;
  return n;
}

void ConditionalSplit::validate_against(const Mask& obs_mask) const {
  if (!(cond_mask.shape() == obs_mask.shape()) || !(target_mask.shape() == obs_mask.shape()))
    throw ShapeError("ConditionalSplit: mask shapes differ from obs_mask");
  for (std::size_t i = 0; i < obs_mask.size(); ++i) {
    if (cond_mask[i] && target_mask[i]) throw ValueError("ConditionalSplit: cond and target overlap");
    if (cond_mask[i] + target_mask[i] != obs_mask[i])
      throw ValueError("ConditionalSplit: cond + target must equal obs_mask");
  }
}

std::size_t ConditionalSplit::target_count() const {
  std::size_t n = 0;
  for (auto m : target_mask.data()) n += m;
  return n;
}

ConditionalSplit split_from_masks(const Mask& obs_mask, const Mask& cond_mask) {
  if (!(obs_mask.shape() == cond_mask.shape())) throw ShapeError("split_from_masks: shape mismatch");
  ConditionalSplit split;
  split.cond_mask = Mask(obs_mask.shape());
  split.target_mask = Mask(obs_mask.shape());
  split.empty_sample.assign(obs_mask.shape().batch, 0);
  for (std::size_t i = 0; i < obs_mask.size(); ++i) {
    if (cond_mask[i] && !obs_mask[i]) throw ValueError("split_from_masks: cond_mask not contained in obs_mask");
    split.cond_mask[i] = cond_mask[i];
    split.target_mask[i] = static_cast<std::uint8_t>(obs_mask[i] - cond_mask[i]);
  }
  const Shape3& s = obs_mask.shape();
  for (std::size_t b = 0; b < s.batch; ++b) {
    bool any = false;
    for (std::size_t k = 0; k < s.channels && !any; ++k)
      for (auto m : obs_mask.row(b, k)) any = any || m;
    split.empty_sample[b] = any ? 0 : 1;
  }
  return split;
}

FrequencyGrid::FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas)) {
  if (omegas_.empty()) throw ValueError("FrequencyGrid: empty grid");
  for (std::size_t j = 0; j < omegas_.size(); ++j) {
    if (!std::isfinite(omegas_[j]) || omegas_[j] <= 0) throw ValueError("FrequencyGrid: omegas must be finite and > 0");
    if (j > 0 && !(omegas_[j] > omegas_[j - 1])) throw ValueError("FrequencyGrid: omegas must be strictly increasing");
  }
}

FrequencyGrid FrequencyGrid::linear(std::size_t j, double f_min, double f_max) {
  if (j == 0) throw ValueError("FrequencyGrid::linear: j must be >= 1");
  if (!(f_min > 0) || (j > 1 && !(f_max > f_min))) throw ValueError("FrequencyGrid::linear: need 0 < f_min < f_max");
  std::vector<double> w(j);
  for (std::size_t i = 0; i < j; ++i) {
    const double f = j == 1 ? f_min : f_min + (f_max - f_min) * static_cast<double>(i) / static_cast<double>(j - 1);
    w[i] = 2.0 * std::numbers::pi * f;
  }
  return FrequencyGrid(std::move(w));
}

double median_spacing(const TimeSeriesBatch& batch) {
  std::vector<double> d;
  d.reserve(batch.batch() * (batch.steps() > 0 ? batch.steps() - 1 : 0));
  for (std::size_t b = 0; b < batch.batch(); ++b) {
    auto t = batch.times(b);
    for (std::size_t l = 1; l < t.size(); ++l) d.push_back(t[l] - t[l - 1]);
  }
  if (d.empty()) throw ValueError("median_spacing: need at least two timestamps");
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(d.begin(), mid);
  return 0.5 * (lo + hi);
}

FrequencyGrid FrequencyGrid::default_for(const TimeSeriesBatch& batch, std::size_t oversample) {
  if (oversample == 0) throw ValueError("FrequencyGrid::default_for: oversample must be >= 1");
  const double f_nyq = 0.5 / median_spacing(batch);
  const std::size_t j = std::max<std::size_t>(1, batch.steps() / 2) * oversample;
  std::vector<double> w(j);
  for (std::size_t i = 0; i < j; ++i)
    w[i] = 2.0 * std::numbers::pi * f_nyq * static_cast<double>(i + 1) / static_cast<double>(j);
  return FrequencyGrid(std::move(w));
}

FrequencyGrid FrequencyGrid::from_json(const nlohmann::json& spec, const TimeSeriesBatch& batch) {
  if (spec.is_null() || spec.empty()) return default_for(batch);
  if (spec.is_array()) {
    std::vector<double> f = spec.get<std::vector<double>>();
    for (double& x : f) x *= 2.0 * std::numbers::pi;
    return FrequencyGrid(std::move(f));
  }
  if (spec.contains("frequencies")) return from_json(spec.at("frequencies"), batch);
  if (spec.contains("j") && spec.contains("f_min") && spec.contains("f_max"))
    return linear(spec.at("j").get<std::size_t>(), spec.at("f_min").get<double>(), spec.at("f_max").get<double>());
  return default_for(batch, spec.value("oversample", std::size_t{1}));
}

double FrequencyGrid::frequency(std::size_t j) const { return omegas_[j] / (2.0 * std::numbers::pi); }

}  // namespace lscd
