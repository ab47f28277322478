#pragma once

#include <functional>

#include "lscd/diffusion/model.hpp"

namespace lscd::diffusion {

/// Noise prediction for a whole batch. `x_t` is zero on condition entries.
using EpsPredictor = std::function<Values(const Values& x_t, const std::vector<std::size_t>& steps)>;

struct SampleOptions {
  std::size_t n_draws = 20;
  /// Multiplies the injected noise sigma(t) z; 0 gives the mean trajectory.
  double noise_scale = 1.0;
  /// Samples per denoiser call.
  std::size_t chunk = 64;
};

struct SampleResult {
  std::vector<Values> draws;  // [n_draws] of [B, K, L]
  Values median;              // point imputation
};

/// Ancestral reverse pass for one draw. Entries outside `cond_mask` start
/// from N(0, 1) at t = T and follow x_{t-1} = mu + sigma(t) z down to t = 1;
/// condition entries equal `cond_values` throughout.
Values reverse_sample(const Values& cond_values, const Mask& cond_mask, const EpsPredictor& eps,
                      const NoiseSchedule& schedule, double noise_scale, Rng& rng);

/// Elementwise median over draws (mean of the two middle values for even counts).
Values median_of(const std::vector<Values>& draws);

/// Imputes every entry outside `cond_mask` with the trained model. `batch`
/// is in data units; condition entries are copied bit-for-bit into each draw.
SampleResult sample_impute(const LscdModel& model, const TimeSeriesBatch& batch, const Mask& cond_mask,
                           const SampleOptions& options, Rng& rng);

}  // namespace lscd::diffusion
