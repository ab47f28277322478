#include "lscd/core/normalize.hpp"

#include <cmath>

#include "lscd/core/error.hpp"

namespace lscd {

NormalizationStats compute_stats(const TimeSeriesBatch& batch) {
  const Shape3& s = batch.shape();
  NormalizationStats stats{std::vector<double>(s.channels, 0.0), std::vector<double>(s.channels, 1.0)};
  for (std::size_t k = 0; k < s.channels; ++k) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t b = 0; b < s.batch; ++b)
      for (std::size_t l = 0; l < s.steps; ++l)
        if (batch.obs_mask(b, k, l)) {
          sum += batch.values(b, k, l);
          ++n;
        }
    if (n == 0) continue;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t b = 0; b < s.batch; ++b)
      for (std::size_t l = 0; l < s.steps; ++l)
        if (batch.obs_mask(b, k, l)) {
          const double d = batch.values(b, k, l) - mean;
          ss += d * d;
        }
    stats.mean[k] = mean;
    const double sd = std::sqrt(ss / static_cast<double>(n));
    stats.std[k] = (n >= 2 && sd > 0.0) ? sd : 1.0;
  }
  return stats;
}

TimeSeriesBatch apply_normalization(const TimeSeriesBatch& batch, const NormalizationStats& stats) {
  const Shape3& s = batch.shape();
  if (stats.mean.size() != s.channels) throw ShapeError("normalize: stats channel count mismatch");
  TimeSeriesBatch out = batch;
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t k = 0; k < s.channels; ++k)
      for (std::size_t l = 0; l < s.steps; ++l)
        if (batch.obs_mask(b, k, l)) out.values(b, k, l) = (batch.values(b, k, l) - stats.mean[k]) / stats.std[k];
  return out;
}

std::pair<TimeSeriesBatch, NormalizationStats> normalize(const TimeSeriesBatch& batch) {
  NormalizationStats stats = compute_stats(batch);
  return {apply_normalization(batch, stats), stats};
}

TimeSeriesBatch denormalize(const TimeSeriesBatch& batch, const NormalizationStats& stats) {
  const Shape3& s = batch.shape();
  if (stats.mean.size() != s.channels) throw ShapeError("denormalize: stats channel count mismatch");
  TimeSeriesBatch out = batch;
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t k = 0; k < s.channels; ++k)
      for (std::size_t l = 0; l < s.steps; ++l)
        if (batch.obs_mask(b, k, l)) out.values(b, k, l) = batch.values(b, k, l) * stats.std[k] + stats.mean[k];
  return out;
}

Values denormalize_values(const Values& values, const NormalizationStats& stats) {
  const Shape3& s = values.shape();
  if (stats.mean.size() != s.channels) throw ShapeError("denormalize_values: stats channel count mismatch");
  Values out = values;
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t k = 0; k < s.channels; ++k)
      for (double& v : out.row(b, k)) v = v * stats.std[k] + stats.mean[k];
  return out;
}

nlohmann::json to_json(const NormalizationStats& stats) { return {{"mean", stats.mean}, {"std", stats.std}}; }

NormalizationStats stats_from_json(const nlohmann::json& j) {
  return {j.at("mean").get<std::vector<double>>(), j.at("std").get<std::vector<double>>()};
}

}  // namespace lscd
