#pragma once

#include <utility>

#include "lscd/core/types.hpp"

namespace lscd {

/// Compute per-channel mean/std over observed entries of the whole batch.
/// Channels with fewer than two observed points (or zero spread) get std = 1.
NormalizationStats compute_stats(const TimeSeriesBatch& batch);

/// Z-score observed entries per channel; masked entries are left untouched.
std::pair<TimeSeriesBatch, NormalizationStats> normalize(const TimeSeriesBatch& batch);
TimeSeriesBatch apply_normalization(const TimeSeriesBatch& batch, const NormalizationStats& stats);
TimeSeriesBatch denormalize(const TimeSeriesBatch& batch, const NormalizationStats& stats);

/// Map a full prediction array back to data units (every entry).
Values denormalize_values(const Values& values, const NormalizationStats& stats);

nlohmann::json to_json(const NormalizationStats& stats);
NormalizationStats stats_from_json(const nlohmann::json& j);

}  // namespace lscd
