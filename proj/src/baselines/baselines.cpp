#include "lscd/baselines/baselines.hpp"

#include <vector>

#include "lscd/core/error.hpp"

namespace lscd::baselines {

namespace {

void check(const TimeSeriesBatch& batch, const ConditionalSplit& split) {
  if (!(split.cond_mask.shape() == batch.shape())) throw ShapeError("baselines: split shape differs from batch");
}

std::vector<double> channel_fallback(const TimeSeriesBatch& batch, const Mask& cond) {
  const Shape3& s = batch.shape();
  std::vector<double> mean(s.channels, 0.0);
  for (std::size_t k = 0; k < s.channels; ++k) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t b = 0; b < s.batch; ++b)
      for (std::size_t l = 0; l < s.steps; ++l)
        if (cond(b, k, l)) {
          sum += batch.values(b, k, l);
          ++n;
        }
    if (n) mean[k] = sum / static_cast<double>(n);
  }
  return mean;
}

void fill_row_mean(const TimeSeriesBatch& batch, const Mask& cond, std::size_t b, std::size_t k, double fallback,
                   Values& out) {
  double sum = 0.0;
  std::size_t n = 0;
  auto m = cond.row(b, k);
  auto v = batch.values.row(b, k);
  for (std::size_t l = 0; l < m.size(); ++l)
    if (m[l]) {
      sum += v[l];
      ++n;
    }
  const double fill = n ? sum / static_cast<double>(n) : fallback;
  auto dst = out.row(b, k);
  for (std::size_t l = 0; l < m.size(); ++l) dst[l] = m[l] ? v[l] : fill;
}

}  // namespace

Values impute_mean(const TimeSeriesBatch& batch, const ConditionalSplit& split) {
  check(batch, split);
  const Shape3& s = batch.shape();
  const auto fallback = channel_fallback(batch, split.cond_mask);
  Values out(s);
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t k = 0; k < s.channels; ++k) fill_row_mean(batch, split.cond_mask, b, k, fallback[k], out);
  return out;
}

Values impute_lerp(const TimeSeriesBatch& batch, const ConditionalSplit& split) {
  check(batch, split);
  const Shape3& s = batch.shape();
  const auto fallback = channel_fallback(batch, split.cond_mask);
  Values out(s);
  std::vector<std::size_t> pts;
  for (std::size_t b = 0; b < s.batch; ++b) {
    auto t = batch.times(b);
    for (std::size_t k = 0; k < s.channels; ++k) {
      auto m = split.cond_mask.row(b, k);
      auto v = batch.values.row(b, k);
      pts.clear();
      for (std::size_t l = 0; l < s.steps; ++l)
        if (m[l]) pts.push_back(l);
      if (pts.size() < 2) {
        fill_row_mean(batch, split.cond_mask, b, k, fallback[k], out);
        continue;
      }
      auto dst = out.row(b, k);
      std::size_t seg = 0;
      for (std::size_t l = 0; l < s.steps; ++l) {
        if (m[l]) {
          dst[l] = v[l];
        } else if (l < pts.front()) {
          dst[l] = v[pts.front()];
        } else if (l > pts.back()) {
          dst[l] = v[pts.back()];
        } else {
          while (pts[seg + 1] < l) ++seg;
          const std::size_t i0 = pts[seg], i1 = pts[seg + 1];
          const double w = (t[l] - t[i0]) / (t[i1] - t[i0]);
          dst[l] = v[i0] + w * (v[i1] - v[i0]);
        }
      }
    }
  }
  return out;
}

}  // namespace lscd::baselines
