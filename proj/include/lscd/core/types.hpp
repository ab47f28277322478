#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lscd/core/array3.hpp"

namespace lscd {

/// Batch of B multivariate series with K channels over L steps.
///
/// Timestamps are stored per sample so irregular grids are representable;
/// masked-out values are carried but never read by any computation.
struct TimeSeriesBatch {
  Values values;
  std::vector<double> timestamps;  // [B, L]
  Mask obs_mask;
  nlohmann::json meta = nlohmann::json::object();

  TimeSeriesBatch() = default;
  TimeSeriesBatch(Values v, std::vector<double> t, Mask m);

  const Shape3& shape() const { return values.shape(); }
  std::size_t batch() const { return values.shape().batch; }
  std::size_t channels() const { return values.shape().channels; }
  std::size_t steps() const { return values.shape().steps; }

  std::span<const double> times(std::size_t b) const {
    return {timestamps.data() + b * steps(), steps()};
  }

  /// Throws ShapeError/ValueError when an invariant is broken.
  void validate() const;

  /// Copy of samples [first, first + count).
  TimeSeriesBatch slice(std::size_t first, std::size_t count) const;
  /// Copy of the given samples in the given order.
  TimeSeriesBatch select(std::span<const std::size_t> samples) const;

  std::size_t observed_count() const;
};

/// Disjoint condition/target masks carved from an observation mask.
struct ConditionalSplit {
  Mask cond_mask;
  Mask target_mask;
  /// One flag per sample: the sample had no observed entries.
  std::vector<std::uint8_t> empty_sample;

  /// Throws unless cond + target == obs exactly and the two are disjoint.
  void validate_against(const Mask& obs_mask) const;
  std::size_t target_count() const;
};

/// Build a split directly from an observation mask and a condition mask.
ConditionalSplit split_from_masks(const Mask& obs_mask, const Mask& cond_mask);

/// Ordered positive angular frequencies shared across a batch.
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  explicit FrequencyGrid(std::vector<double> omegas);

  /// j linearly spaced frequencies (cycles per time unit) from f_min to f_max inclusive.
  static FrequencyGrid linear(std::size_t j, double f_min, double f_max);
  /// J = L/2 frequencies in (0, f_Nyquist], with f_Nyquist from the median timestamp spacing.
  static FrequencyGrid default_for(const TimeSeriesBatch& batch, std::size_t oversample = 1);
  static FrequencyGrid from_json(const nlohmann::json& spec, const TimeSeriesBatch& batch);

  std::size_t size() const { return omegas_.size(); }
  const std::vector<double>& omegas() const { return omegas_; }
  double omega(std::size_t j) const { return omegas_[j]; }
  /// Frequency in cycles per time unit.
  double frequency(std::size_t j) const;

 private:
  std::vector<double> omegas_;
};

/// Median spacing between consecutive timestamps over all samples.
double median_spacing(const TimeSeriesBatch& batch);

/// Per-channel z-scoring statistics over observed entries.
struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> std;
};

}  // namespace lscd
