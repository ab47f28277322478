#pragma once

#include <memory>
#include <vector>

#include "lscd/autodiff/layers.hpp"
#include "lscd/autodiff/ls_op.hpp"
#include "lscd/diffusion/schedule.hpp"
#include "lscd/lombscargle/fap.hpp"

namespace lscd::diffusion {

struct EncoderConfig {
  std::size_t d_model = 64;
  std::size_t n_heads = 8;
  std::size_t depth_frequency = 4;
  std::size_t depth_feature = 4;
  /// Ablation: without it there is no channel embedding and no attention
  /// across channels, so the encoder is channel-permutation equivariant.
  bool feature_attention = true;
};

struct DenoiserConfig {
  std::size_t channels = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 8;
  std::size_t ff_dim = 64;
  std::size_t step_embedding_dim = 128;
  std::size_t time_embedding_dim = 128;
  std::size_t feature_embedding_dim = 16;
};

struct ModelConfig {
  std::size_t n_channels = 1;
  /// false drops the spectrum encoder entirely (plain conditional denoiser).
  bool use_spectrum = true;
  EncoderConfig encoder;
  DenoiserConfig denoiser;
  ls::FeatureOptions feature;
  bool center_spectrum = false;
  std::vector<double> grid_omegas;  // fixed at training time
  std::size_t steps = 50;
  ScheduleKind schedule = ScheduleKind::quadratic;
  double beta_min = 1e-4;
  double beta_max = 0.5;
  std::uint64_t init_seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

/// Inputs shared by the encoder and the denoiser for one batch.
struct Conditioning {
  std::vector<double> timestamps;  // [B, L]
  Mask cond_mask;                  // [B, K, L]
  Values cond_values;              // [B, K, L], zero outside cond_mask
};

Conditioning make_conditioning(const TimeSeriesBatch& batch, const Mask& cond_mask);

/// Step-independent denoiser input: the side information (time, channel,
/// mask and spectrum embedding) projected by each residual layer.
struct DenoiseContext {
  std::vector<ad::Var> side_proj;  // per layer, [B * K * L, 2 * channels]
};

class LscdModel {
 public:
  explicit LscdModel(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  ad::ParameterStore& params() { return params_; }
  const ad::ParameterStore& params() const { return params_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  FrequencyGrid grid() const { return FrequencyGrid(config_.grid_omegas); }

  NormalizationStats stats;

  /// Spectrum embedding z_S [B * K, d_model] from the LS feature of `values`
  /// over `cond_mask`. `values` is [B, K, L].
  ad::Var encode(ad::Tape& tape, ad::Var values, const Conditioning& c) const;

  /// `z` is the encoder output, ignored when use_spectrum is false.
  DenoiseContext context(ad::Tape& tape, const Conditioning& c, const ad::Var* z) const;

  /// Predicted noise [B, K, L]. `x_t` holds the noisy target (zero on
  /// condition entries); `steps` gives one diffusion step per sample.
  ad::Var denoise(ad::Tape& tape, ad::Var x_t, const Conditioning& c, const std::vector<std::size_t>& steps,
                  const DenoiseContext& ctx) const;
  ad::Var denoise(ad::Tape& tape, ad::Var x_t, const Conditioning& c, const std::vector<std::size_t>& steps,
                  const ad::Var* z) const;

  /// Convenience: encode from the condition values then denoise.
  ad::Var forward(ad::Tape& tape, ad::Var x_t, const Conditioning& c, const std::vector<std::size_t>& steps) const;

  void save(const std::filesystem::path& prefix, const nlohmann::json& extra = nlohmann::json::object()) const;
  static std::unique_ptr<LscdModel> load(const std::filesystem::path& prefix, nlohmann::json* extra = nullptr);

 private:
  struct ResidualLayer {
    ad::Linear step_proj;
    ad::TransformerLayer time_layer;
    ad::TransformerLayer feature_layer;
    ad::Parameter* conv_w = nullptr;
    ad::Parameter* conv_b = nullptr;
    ad::Linear cond_proj;
    ad::Linear out_proj;
  };

  ModelConfig config_;
  NoiseSchedule schedule_;
  ad::ParameterStore params_;

  // Encoder.
  ad::Linear enc_in_;
  std::vector<ad::TransformerLayer> enc_freq_;
  ad::Parameter* enc_channel_emb_ = nullptr;
  std::vector<ad::TransformerLayer> enc_feat_;

  // Denoiser.
  ad::Linear in_proj_;
  ad::Linear step_mlp1_, step_mlp2_;
  ad::Parameter* feature_emb_ = nullptr;
  std::vector<ResidualLayer> layers_;
  ad::Linear out1_, out2_;
};

}  // namespace lscd::diffusion
