#pragma once

#include <span>
#include <vector>

#include "lscd/core/types.hpp"

namespace lscd::ls {

/// Floor applied to the omega in the tau shift and to both power denominators.
inline constexpr double kDenominatorClamp = 1e-10;

/// Power spectrum of every (sample, channel) row over a shared grid.
struct Periodogram {
  Values power;  // [B, K, J]
  Values tau;    // [B, K, J]
  FrequencyGrid grid;
  /// [B * K]; 1 when the row had fewer than two masked-in points.
  std::vector<std::uint8_t> degenerate;
};

/// Time shift per (sample, channel, frequency) over masked-in points.
/// `empty` (if given) receives [B * K] flags for rows with no masked-in point.
Values compute_tau(std::span<const double> timestamps, const Mask& mask, const FrequencyGrid& grid,
                   std::vector<std::uint8_t>* empty = nullptr);

/// Masked Lomb-Scargle periodogram.
///
/// `timestamps` is [B, L]; `values` and `mask` are [B, K, L]. With `center`
/// the masked mean is subtracted first. Values where mask == 0 are never read.
Periodogram periodogram(const Values& values, std::span<const double> timestamps, const Mask& mask,
                        const FrequencyGrid& grid, bool center);

/// Periodogram over the batch observation mask.
Periodogram periodogram(const TimeSeriesBatch& batch, const FrequencyGrid& grid, bool center);

/// Periodogram over the condition entries of a split.
Periodogram periodogram(const TimeSeriesBatch& batch, const ConditionalSplit& split, const FrequencyGrid& grid,
                        bool center);

/// Gradient of <upstream, P> with respect to `values`. Exact: tau does not
/// depend on the values. Masked-out positions and degenerate rows get 0.
Values periodogram_vjp(const Values& values, std::span<const double> timestamps, const Mask& mask,
                       const FrequencyGrid& grid, bool center, const Values& upstream);

}  // namespace lscd::ls
