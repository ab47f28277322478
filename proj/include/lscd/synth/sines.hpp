#pragma once

#include <cstdint>
#include <vector>

#include "lscd/core/types.hpp"

namespace lscd::synth {

/// One channel of the sine generator: N_k components with fixed amplitudes
/// and per-sample frequencies drawn as Beta(2,2) * width + (mean - width/2).
struct SineChannelSpec {
  std::vector<double> mean_freqs;
  std::vector<double> widths;
  std::vector<double> amplitudes;
  double noise_sigma = 0.1;

  std::size_t n_components() const { return mean_freqs.size(); }
  void validate() const;
};

/// The five reference channels (components, mean frequencies, widths, amplitudes).
std::vector<SineChannelSpec> reference_channels(double noise_sigma = 0.1);

struct SinesConfig {
  std::size_t n_samples = 2000;
  std::size_t length = 100;
  double horizon = 10.0;
  std::vector<SineChannelSpec> channels = reference_channels();
  std::uint64_t seed = 0;
  /// Timestamp jitter as a fraction of the step (0 = uniform grid, must be < 1).
  double jitter = 0.0;

  nlohmann::json to_json() const;
  static SinesConfig from_json(const nlohmann::json& j);
};

struct SinesDataset {
  TimeSeriesBatch batch;
  /// Drawn component frequencies, [sample][channel][component].
  std::vector<std::vector<std::vector<double>>> frequencies;
  std::vector<double> phases;  // flattened in the same order as `frequencies`

  /// Frequency of the largest-amplitude component of a channel.
  double dominant_frequency(std::size_t sample, std::size_t channel) const;
  nlohmann::json ground_truth_json() const;
};

/// Fully observed sum-of-sines batch; sample b uses the stream derive_seed(seed, b).
SinesDataset generate_sines(const SinesConfig& config);

}  // namespace lscd::synth
