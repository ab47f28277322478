#include "lscd/metrics/metrics.hpp"

#include <cmath>
#include <limits>

#include "lscd/core/error.hpp"
#include "lscd/lombscargle/fft_psd.hpp"
#include "lscd/lombscargle/periodogram.hpp"

namespace lscd::metrics {

namespace {

void check(const TimeSeriesBatch& truth, const Values& pred) {
  if (!(pred.shape() == truth.shape())) throw ShapeError("metrics: prediction shape differs from truth");
}

struct ErrorSums {
  double abs = 0.0;
  double sq = 0.0;
  std::size_t n = 0;
  std::vector<double> abs_k, sq_k;
  std::vector<std::size_t> n_k;
};

ErrorSums error_sums(const TimeSeriesBatch& truth, const Values& pred, const ConditionalSplit& split) {
  check(truth, pred);
  if (!(split.target_mask.shape() == truth.shape())) throw ShapeError("metrics: split shape differs from truth");
  const Shape3& s = truth.shape();
  ErrorSums e;
  e.abs_k.assign(s.channels, 0.0);
  e.sq_k.assign(s.channels, 0.0);
  e.n_k.assign(s.channels, 0);
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t k = 0; k < s.channels; ++k)
      for (std::size_t l = 0; l < s.steps; ++l) {
        if (!split.target_mask(b, k, l)) continue;
        const double d = truth.values(b, k, l) - pred(b, k, l);
        e.abs += std::abs(d);
        e.sq += d * d;
        e.abs_k[k] += std::abs(d);
        e.sq_k[k] += d * d;
        ++e.n;
        ++e.n_k[k];
      }
  if (e.n == 0) throw ValueError("metrics: no target entries; MAE/RMSE undefined");
  return e;
}

/// Prediction evaluated at the truth's observed positions only.
TimeSeriesBatch as_observed(const TimeSeriesBatch& truth, const Values& pred_full) {
  check(truth, pred_full);
  TimeSeriesBatch p = truth;
  p.values = pred_full;
  return p;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double mae(const TimeSeriesBatch& truth, const Values& pred, const ConditionalSplit& split) {
  const auto e = error_sums(truth, pred, split);
  return e.abs / static_cast<double>(e.n);
}

double rmse(const TimeSeriesBatch& truth, const Values& pred, const ConditionalSplit& split) {
  const auto e = error_sums(truth, pred, split);
  return std::sqrt(e.sq / static_cast<double>(e.n));
}

std::optional<double> smae_from_psd(std::span<const double> gt, std::span<const double> pred) {
  if (gt.size() != pred.size() || gt.empty()) throw ShapeError("smae_from_psd: length mismatch");
  double sg = 0.0, sp = 0.0;
  for (std::size_t j = 0; j < gt.size(); ++j) {
    sg += gt[j];
    sp += pred[j];
  }
  if (!(sg > 0.0) || !(sp > 0.0)) return std::nullopt;
  double acc = 0.0;
  for (std::size_t j = 0; j < gt.size(); ++j) acc += std::abs(gt[j] / sg - pred[j] / sp);
  return acc / static_cast<double>(gt.size());
}

double lead_frequency(std::span<const double> psd, const FrequencyGrid& grid) {
  if (psd.size() != grid.size()) throw ShapeError("lead_frequency: PSD length differs from grid");
  return grid.frequency(ls::argmax(psd));
}

namespace {

template <typename RowScore>
SpectralScore spectral_score(const TimeSeriesBatch& truth, const Values& pred_full, const FrequencyGrid& grid,
                             RowScore score) {
  const auto pg = ls::periodogram(truth, grid, true);
  const auto pp = ls::periodogram(as_observed(truth, pred_full), grid, true);
  const Shape3& s = truth.shape();
  SpectralScore out;
  std::vector<double> sum_k(s.channels, 0.0);
  std::vector<std::size_t> n_k(s.channels, 0);
  double total = 0.0;
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t k = 0; k < s.channels; ++k) {
      std::optional<double> v;
      if (!pg.degenerate[b * s.channels + k]) v = score(pg.power.row(b, k), pp.power.row(b, k));
      if (!v) {
        ++out.skipped;
        continue;
      }
      total += *v;
      sum_k[k] += *v;
      ++n_k[k];
      ++out.evaluated;
    }
  out.value = out.evaluated ? total / static_cast<double>(out.evaluated) : kNaN;
  for (std::size_t k = 0; k < s.channels; ++k)
    out.per_channel.push_back(n_k[k] ? sum_k[k] / static_cast<double>(n_k[k]) : kNaN);
  return out;
}

}  // namespace

SpectralScore s_mae(const TimeSeriesBatch& truth, const Values& pred_full, const FrequencyGrid& grid) {
  return spectral_score(truth, pred_full, grid,
                        [](std::span<const double> g, std::span<const double> p) { return smae_from_psd(g, p); });
}

SpectralScore lfe(const TimeSeriesBatch& truth, const Values& pred_full, const FrequencyGrid& grid) {
  return spectral_score(truth, pred_full, grid, [&](std::span<const double> g, std::span<const double> p) {
    return std::optional<double>(std::abs(lead_frequency(g, grid) - lead_frequency(p, grid)));
  });
}

EvalReport evaluate(const TimeSeriesBatch& truth, const Values& pred_full, const ConditionalSplit& split,
                    const FrequencyGrid& grid) {
  const auto e = error_sums(truth, pred_full, split);
  EvalReport r;
  r.mae = e.abs / static_cast<double>(e.n);
  r.rmse = std::sqrt(e.sq / static_cast<double>(e.n));
  r.target_count = e.n;
  for (std::size_t k = 0; k < e.n_k.size(); ++k) {
    const double n = static_cast<double>(e.n_k[k]);
    r.mae_per_channel.push_back(e.n_k[k] ? e.abs_k[k] / n : kNaN);
    r.rmse_per_channel.push_back(e.n_k[k] ? std::sqrt(e.sq_k[k] / n) : kNaN);
  }
  const auto sm = s_mae(truth, pred_full, grid);
  const auto lf = lfe(truth, pred_full, grid);
  r.s_mae = sm.value;
  r.lfe = lf.value;
  r.s_mae_per_channel = sm.per_channel;
  r.lfe_per_channel = lf.per_channel;
  r.spectral_evaluated = sm.evaluated;
  r.spectral_skipped = sm.skipped;
  return r;
}

nlohmann::json EvalReport::to_json() const {
  auto clean = [](const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) {
      if (std::isfinite(x))
        a.push_back(x);
      else
        a.push_back(nullptr);
    }
    return a;
  };
  return {{"mae", mae},
          {"rmse", rmse},
          {"s_mae", s_mae},
          {"lfe", lfe},
          {"per_channel",
           {{"mae", clean(mae_per_channel)},
            {"rmse", clean(rmse_per_channel)},
            {"s_mae", clean(s_mae_per_channel)},
            {"lfe", clean(lfe_per_channel)}}},
          {"target_count", target_count},
          {"spectral_evaluated", spectral_evaluated},
          {"spectral_skipped", spectral_skipped}};
}

}  // namespace lscd::metrics
