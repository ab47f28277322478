#pragma once

#include "lscd/core/types.hpp"

namespace lscd::baselines {

/// Fill every non-condition entry with the per-(sample, channel) mean of its
/// condition entries. Empty rows use the batch-wide channel mean of condition
/// entries, or 0 if the channel has none anywhere. Condition entries are copied.
Values impute_mean(const TimeSeriesBatch& batch, const ConditionalSplit& split);

/// Linear interpolation in time between neighbouring condition points, with
/// constant extension past the first/last one. Rows with fewer than two
/// condition points fall back to the mean rule.
Values impute_lerp(const TimeSeriesBatch& batch, const ConditionalSplit& split);

}  // namespace lscd::baselines
