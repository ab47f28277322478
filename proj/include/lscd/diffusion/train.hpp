#pragma once

#include <functional>
#include <string>

#include "lscd/autodiff/optim.hpp"
#include "lscd/core/split.hpp"
#include "lscd/diffusion/model.hpp"

namespace lscd::diffusion {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  SplitStrategy split = SplitStrategy::uniform_random;
  /// Target fraction of observed entries per batch; < 0 draws it from U[0, 1] per batch.
  double mask_ratio = -1.0;
  double lambda1 = 1.0;
  double lambda2 = 0.1;
  /// Reverse steps unrolled for the spectral consistency loss.
  std::size_t truncation = 5;

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct LossRecord {
  std::size_t epoch = 0;
  std::string split;  // "train" or "val"
  double loss = 0.0;
  double s_cons = 0.0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  std::vector<LossRecord> trace;
  std::size_t best_epoch = 0;
  double best_objective = 0.0;
};

/// Called after every epoch with the current parameters.
using EpochCallback = std::function<void(std::size_t epoch, const LscdModel& model, bool is_best)>;

/// Outcome of one optimizer step's loss evaluation.
struct StepLosses {
  double loss = 0.0;    // denoising loss over target entries
  double s_cons = 0.0;  // spectral consistency loss (0 when not computed)
  bool skipped = false; // the split left no target entry
};

/// Builds the training objective for one normalized mini-batch and, when
/// `backward` is set, accumulates its gradient into the parameters.
/// `main_rng` drives the split, steps and noise of the denoising loss;
/// `scons_rng` (if given) drives the truncated reverse pass, which is then
/// added with weight `lambda2`.
StepLosses training_objective(const LscdModel& model, const TimeSeriesBatch& batch, const TrainConfig& cfg,
                              Rng& main_rng, Rng* scons_rng, double lambda1, double lambda2, bool backward);

/// Spectral consistency between the observed series and a reconstruction:
/// sum over (sample, channel, frequency) of squared LS-feature differences,
/// both features taken over `obs_mask`, divided by the batch size.
ad::Var scons_loss(ad::Tape& tape, ad::Var x_hat, const Values& x0, const std::vector<double>& timestamps,
                   const Mask& obs_mask, const LscdModel& model);

/// Denoising score-matching training. Sets model.stats from `train`, keeps
/// the parameters with the lowest validation loss.
TrainResult train_main(LscdModel& model, const TimeSeriesBatch& train, const TimeSeriesBatch& val,
                       const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Fine-tuning on lambda1 * L + lambda2 * L_SCons, starting from the current
/// parameters and statistics.
TrainResult finetune_spectral(LscdModel& model, const TimeSeriesBatch& train, const TimeSeriesBatch& val,
                              const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace lscd::diffusion
