#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lscd/core/types.hpp"

namespace lscd::metrics {

/// Mean absolute error over target entries (obs - cond). Throws when there are none.
double mae(const TimeSeriesBatch& truth, const Values& pred, const ConditionalSplit& split);
/// Root mean squared error over target entries.
double rmse(const TimeSeriesBatch& truth, const Values& pred, const ConditionalSplit& split);

/// Mean |a/sum(a) - b/sum(b)| over the grid; empty when either sum is zero.
std::optional<double> smae_from_psd(std::span<const double> gt, std::span<const double> pred);

/// Frequency (cycles per time unit) of the PSD maximum; ties go to the lowest frequency.
double lead_frequency(std::span<const double> psd, const FrequencyGrid& grid);

struct SpectralScore {
  double value = 0.0;
  std::size_t evaluated = 0;  // (sample, channel) rows that entered the mean
  std::size_t skipped = 0;    // degenerate rows
  std::vector<double> per_channel;
};

/// Spectral MAE between centered periodograms of truth and prediction, both
/// taken over the observation mask of `truth`; averaged per (sample, channel).
SpectralScore s_mae(const TimeSeriesBatch& truth, const Values& pred_full, const FrequencyGrid& grid);

/// Leading frequency error, averaged over (sample, channel) rows.
SpectralScore lfe(const TimeSeriesBatch& truth, const Values& pred_full, const FrequencyGrid& grid);

struct EvalReport {
  double mae = 0.0;
  double rmse = 0.0;
  double s_mae = 0.0;
  double lfe = 0.0;
  std::vector<double> mae_per_channel;
  std::vector<double> rmse_per_channel;
  std::vector<double> s_mae_per_channel;
  std::vector<double> lfe_per_channel;
  std::size_t target_count = 0;
  std::size_t spectral_evaluated = 0;
  std::size_t spectral_skipped = 0;

  nlohmann::json to_json() const;
};

EvalReport evaluate(const TimeSeriesBatch& truth, const Values& pred_full, const ConditionalSplit& split,
                    const FrequencyGrid& grid);

}  // namespace lscd::metrics
