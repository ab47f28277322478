#pragma once

#include <optional>
#include <string>

#include "lscd/diffusion/train.hpp"
#include "lscd/missingness/missingness.hpp"
#include "lscd/synth/sines.hpp"

namespace lscd::cli {

/// Contiguous sample ranges: [0, train) | [train, train + val) | rest = test.
struct SampleSplit {
  double train = 0.7;
  double val = 0.1;

  std::size_t n_train(std::size_t n) const;
  std::size_t n_val(std::size_t n) const;
};

struct EvalConfig {
  std::size_t n_draws = 20;
  std::size_t chunk = 64;
  double noise_scale = 1.0;
  /// Bins of the leading-frequency histograms.
  std::size_t lf_bins = 25;
};

/// One experiment. Every stochastic stage draws from a stream derived from `seed`.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string dataset_name = "sines";
  synth::SinesConfig dataset;
  /// Pointwise MCAR applied before the studied mechanism, making the series irregular.
  double base_mcar = 0.1;
  missing::MissingnessSpec missingness;
  nlohmann::json grid = nlohmann::json::object();
  SampleSplit split;
  diffusion::ModelConfig model;
  diffusion::TrainConfig train;
  diffusion::TrainConfig finetune;
  EvalConfig eval;

  /// Parses and validates; unknown top-level keys are rejected.
  static ExperimentConfig from_json(const nlohmann::json& j, std::optional<std::uint64_t> seed_override = {});
  /// Fully resolved config (defaults filled in, derived seeds applied).
  nlohmann::json to_json() const;
  /// Content hash of the resolved config.
  std::string hash() const;
};

/// Stream tags for derive_seed(config.seed, tag).
enum SeedStream : std::uint64_t {
  kSeedDataset = 0x11,
  kSeedBaseMcar = 0x21,
  kSeedMechanism = 0x22,
  kSeedInit = 0x31,
  kSeedTrain = 0x32,
  kSeedFinetune = 0x33,
  kSeedImpute = 0x41,
};

}  // namespace lscd::cli
