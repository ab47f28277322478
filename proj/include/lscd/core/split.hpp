#pragma once

#include "lscd/core/random.hpp"
#include "lscd/core/types.hpp"

namespace lscd {

enum class SplitStrategy {
  /// Every observed entry goes to the target independently with probability `ratio`.
  uniform_random,
  /// Exactly round(ratio * n_observed) entries per sample go to the target.
  per_sample_ratio,
};

SplitStrategy parse_split_strategy(const std::string& name);
std::string to_string(SplitStrategy s);

/// Carve a condition/target split out of the batch observation mask.
///
/// Deterministic for a given generator state. Samples with no observed
/// entries get an all-zero target and are flagged in `empty_sample`.
ConditionalSplit make_conditional_split(const TimeSeriesBatch& batch, SplitStrategy strategy, double ratio,
                                        Rng& rng);

}  // namespace lscd
