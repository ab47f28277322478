#include "lscd/diffusion/model.hpp"

#include <algorithm>
#include <cmath>

#include "lscd/autodiff/optim.hpp"
#include "lscd/core/io.hpp"
#include "lscd/core/normalize.hpp"

namespace lscd::diffusion {

using namespace lscd::ad;

void ModelConfig::validate() const {
  if (n_channels < 1) throw ValueError("model: n_channels must be >= 1");
  if (encoder.n_heads == 0 || encoder.d_model % encoder.n_heads)
    throw ValueError("model: encoder d_model must be divisible by n_heads");
  if (denoiser.n_heads == 0 || denoiser.channels % denoiser.n_heads)
    throw ValueError("model: denoiser channels must be divisible by n_heads");
  if (denoiser.n_layers < 1) throw ValueError("model: need at least one residual layer");
  if (denoiser.step_embedding_dim % 2 || denoiser.time_embedding_dim % 2)
    throw ValueError("model: embedding dims must be even");
  if (use_spectrum && grid_omegas.empty()) throw ValueError("model: spectrum conditioning needs a frequency grid");
  if (steps < 1) throw ValueError("model: steps must be >= 1");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"n_channels", n_channels},
          {"use_spectrum", use_spectrum},
          {"encoder",
           {{"d_model", encoder.d_model},
            {"n_heads", encoder.n_heads},
            {"depth_frequency", encoder.depth_frequency},
            {"depth_feature", encoder.depth_feature},
            {"feature_attention", encoder.feature_attention}}},
          {"denoiser",
           {{"channels", denoiser.channels},
            {"n_layers", denoiser.n_layers},
            {"n_heads", denoiser.n_heads},
            {"ff_dim", denoiser.ff_dim},
            {"step_embedding_dim", denoiser.step_embedding_dim},
            {"time_embedding_dim", denoiser.time_embedding_dim},
            {"feature_embedding_dim", denoiser.feature_embedding_dim}}},
          {"feature", ls::to_json(feature)},
          {"center_spectrum", center_spectrum},
          {"grid_omegas", grid_omegas},
          {"schedule", {{"steps", steps}, {"kind", to_string(schedule)}, {"beta_min", beta_min}, {"beta_max", beta_max}}},
          {"init_seed", init_seed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.n_channels = j.value("n_channels", c.n_channels);
  c.use_spectrum = j.value("use_spectrum", c.use_spectrum);
  if (j.contains("encoder")) {
    const auto& e = j["encoder"];
    c.encoder.d_model = e.value("d_model", c.encoder.d_model);
    c.encoder.n_heads = e.value("n_heads", c.encoder.n_heads);
    c.encoder.depth_frequency = e.value("depth_frequency", c.encoder.depth_frequency);
    c.encoder.depth_feature = e.value("depth_feature", c.encoder.depth_feature);
    c.encoder.feature_attention = e.value("feature_attention", c.encoder.feature_attention);
  }
  if (j.contains("denoiser")) {
    const auto& d = j["denoiser"];
    c.denoiser.channels = d.value("channels", c.denoiser.channels);
    c.denoiser.n_layers = d.value("n_layers", c.denoiser.n_layers);
    c.denoiser.n_heads = d.value("n_heads", c.denoiser.n_heads);
    c.denoiser.ff_dim = d.value("ff_dim", c.denoiser.ff_dim);
    c.denoiser.step_embedding_dim = d.value("step_embedding_dim", c.denoiser.step_embedding_dim);
    c.denoiser.time_embedding_dim = d.value("time_embedding_dim", c.denoiser.time_embedding_dim);
    c.denoiser.feature_embedding_dim = d.value("feature_embedding_dim", c.denoiser.feature_embedding_dim);
  }
  if (j.contains("feature")) c.feature = ls::feature_options_from_json(j["feature"]);
  c.center_spectrum = j.value("center_spectrum", c.center_spectrum);
  c.grid_omegas = j.value("grid_omegas", c.grid_omegas);
  if (j.contains("schedule")) {
    const auto& s = j["schedule"];
    c.steps = s.value("steps", c.steps);
    c.schedule = parse_schedule_kind(s.value("kind", to_string(c.schedule)));
    c.beta_min = s.value("beta_min", c.beta_min);
    c.beta_max = s.value("beta_max", c.beta_max);
  }
  c.init_seed = j.value("init_seed", c.init_seed);
  return c;
}

Conditioning make_conditioning(const TimeSeriesBatch& batch, const Mask& cond_mask) {
  if (cond_mask.shape() != batch.shape()) throw ShapeError("make_conditioning: mask shape mismatch");
  Conditioning c{batch.timestamps, cond_mask, Values(batch.shape())};
  for (std::size_t i = 0; i < cond_mask.size(); ++i)
    if (cond_mask[i]) c.cond_values[i] = batch.values[i];
  return c;
}

LscdModel::LscdModel(ModelConfig config)
    : config_(std::move(config)),
      schedule_(make_schedule(config_.steps, config_.schedule, config_.beta_min, config_.beta_max)) {
  config_.validate();
  Rng rng(derive_seed(config_.init_seed, 0x1ab));
  const auto& e = config_.encoder;
  const auto& d = config_.denoiser;
  const std::size_t K = config_.n_channels;
  if (config_.use_spectrum) {
    enc_in_ = Linear::create(params_, "enc.in", 1, e.d_model, rng);
    for (std::size_t i = 0; i < e.depth_frequency; ++i)
      enc_freq_.push_back(TransformerLayer::create(params_, "enc.freq" + std::to_string(i), e.d_model, e.n_heads,
                                                   e.d_model, rng));
    if (e.feature_attention) {
      enc_channel_emb_ = &params_.add("enc.channel_emb", truncated_normal({K, e.d_model}, 0.02, rng), "trunc_normal");
      for (std::size_t i = 0; i < e.depth_feature; ++i)
        enc_feat_.push_back(TransformerLayer::create(params_, "enc.feat" + std::to_string(i), e.d_model, e.n_heads,
                                                     e.d_model, rng));
    }
  }
  const std::size_t C = d.channels;
  const std::size_t side = d.time_embedding_dim + d.feature_embedding_dim + 1 + (config_.use_spectrum ? e.d_model : 0);
  in_proj_ = Linear::create(params_, "den.in", 2, C, rng);
  step_mlp1_ = Linear::create(params_, "den.step1", d.step_embedding_dim, d.step_embedding_dim, rng);
  step_mlp2_ = Linear::create(params_, "den.step2", d.step_embedding_dim, d.step_embedding_dim, rng);
  feature_emb_ = &params_.add("den.feature_emb", truncated_normal({K, d.feature_embedding_dim}, 0.02, rng),
                              "trunc_normal");
  for (std::size_t i = 0; i < d.n_layers; ++i) {
    const std::string p = "den.layer" + std::to_string(i);
    ResidualLayer r;
    r.step_proj = Linear::create(params_, p + ".step", d.step_embedding_dim, C, rng);
    r.time_layer = TransformerLayer::create(params_, p + ".time", C, d.n_heads, d.ff_dim, rng);
    if (K > 1) r.feature_layer = TransformerLayer::create(params_, p + ".feat", C, d.n_heads, d.ff_dim, rng);
    r.conv_w = &params_.add(p + ".conv.w", truncated_normal({3 * C, 2 * C}, 0.02, rng), "trunc_normal");
    r.conv_b = &params_.add(p + ".conv.b", Tensor(Shape{2 * C}), "zeros");
    r.cond_proj = Linear::create(params_, p + ".cond", side, 2 * C, rng);
    r.out_proj = Linear::create(params_, p + ".out", C, 2 * C, rng);
    layers_.push_back(r);
  }
  out1_ = Linear::create(params_, "den.out1", C, C, rng);
  out2_ = Linear::create(params_, "den.out2", C, 1, rng);
  stats.mean.assign(K, 0.0);
  stats.std.assign(K, 1.0);
}

Var LscdModel::encode(Tape& tape, Var values, const Conditioning& c) const {
  if (!config_.use_spectrum) throw ValueError("encode: model was built without the spectrum encoder");
  const Shape3 s = c.cond_mask.shape();
  if (s.channels != config_.n_channels) throw ShapeError("encode: channel count does not match the model");
  const std::size_t BK = s.batch * s.channels;
  const std::size_t J = config_.grid_omegas.size();
  const std::size_t D = config_.encoder.d_model;
  LsFeatureSpec spec{c.timestamps, c.cond_mask, grid(), config_.feature, config_.center_spectrum};
  auto feat = ls_feature(values, spec);
  auto h = enc_in_(tape, reshape(feat, {BK * J, 1}));
  std::vector<double> pos(J);
  for (std::size_t j = 0; j < J; ++j) pos[j] = static_cast<double>(j);
  const Tensor pe = sinusoidal_embedding(pos, D);
  Tensor pe_all(Shape{BK * J, D});
  for (std::size_t r = 0; r < BK; ++r) std::copy(pe.data.begin(), pe.data.end(), pe_all.data.begin() + r * J * D);
  h = add(h, tape.constant(std::move(pe_all)));
  for (const auto& layer : enc_freq_) h = layer(tape, h, J);
  auto z = mean_pool_groups(h, J);
  if (config_.encoder.feature_attention) {
    std::vector<std::size_t> idx(BK);
    for (std::size_t r = 0; r < BK; ++r) idx[r] = r % s.channels;
    z = add(z, gather_rows(tape.parameter(*enc_channel_emb_), idx));
    for (const auto& layer : enc_feat_) z = layer(tape, z, s.channels);
  }
  return z;
}

DenoiseContext LscdModel::context(Tape& tape, const Conditioning& c, const Var* z) const {
  const Shape3 s = c.cond_mask.shape();
  const std::size_t B = s.batch, K = s.channels, L = s.steps, N = s.size();
  if (K != config_.n_channels) throw ShapeError("denoise: channel count does not match the model");
  if (config_.use_spectrum && !z) throw ValueError("denoise: spectrum embedding required");
  const auto& d = config_.denoiser;

  Tensor mask_col(Shape{N, 1});
  for (std::size_t i = 0; i < N; ++i) mask_col[i] = c.cond_mask[i] ? 1.0 : 0.0;
  // Side information per token (b, k, l).
  std::vector<double> diffs;
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t l = 1; l < L; ++l) diffs.push_back(c.timestamps[b * L + l] - c.timestamps[b * L + l - 1]);
  double dt = 1.0;
  if (!diffs.empty()) {
    std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
    dt = diffs[diffs.size() / 2];
  }
  std::vector<double> pos(B * L);
  for (std::size_t i = 0; i < B * L; ++i) pos[i] = (c.timestamps[i] - c.timestamps[(i / L) * L]) / dt;
  const Tensor te = sinusoidal_embedding(pos, d.time_embedding_dim);
  Tensor time_tok(Shape{N, d.time_embedding_dim});
  std::vector<std::size_t> chan_idx(N);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = 0; l < L; ++l) {
        const std::size_t r = (b * K + k) * L + l;
        chan_idx[r] = k;
        std::copy_n(te.data.begin() + (b * L + l) * d.time_embedding_dim, d.time_embedding_dim,
                    time_tok.data.begin() + r * d.time_embedding_dim);
      }
  std::vector<Var> side_parts{tape.constant(std::move(time_tok)),
                              gather_rows(tape.parameter(*feature_emb_), chan_idx),
                              tape.constant(std::move(mask_col))};
  if (config_.use_spectrum) side_parts.push_back(repeat_rows(*z, L));
  auto side = concat_cols(side_parts);
  DenoiseContext ctx;
  for (const auto& layer : layers_) ctx.side_proj.push_back(layer.cond_proj(tape, side));
  return ctx;
}

Var LscdModel::denoise(Tape& tape, Var x_t, const Conditioning& c, const std::vector<std::size_t>& steps,
                       const Var* z) const {
  return denoise(tape, x_t, c, steps, context(tape, c, z));
}

Var LscdModel::denoise(Tape& tape, Var x_t, const Conditioning& c, const std::vector<std::size_t>& steps,
                       const DenoiseContext& ctx) const {
  const Shape3 s = c.cond_mask.shape();
  const std::size_t B = s.batch, K = s.channels, L = s.steps, N = s.size();
  if (K != config_.n_channels) throw ShapeError("denoise: channel count does not match the model");
  if (x_t.value().size() != N || steps.size() != B) throw ShapeError("denoise: input shapes do not match");
  if (ctx.side_proj.size() != layers_.size()) throw ValueError("denoise: context does not match the model");
  const auto& d = config_.denoiser;
  const std::size_t C = d.channels;

  Tensor cond_col(Shape{N, 1}, c.cond_values.data());
  auto h = relu(in_proj_(tape, concat_cols({tape.constant(std::move(cond_col)), reshape(x_t, {N, 1})})));

  std::vector<double> tpos(steps.begin(), steps.end());
  auto step_emb = silu(step_mlp2_(tape, silu(step_mlp1_(tape, tape.constant(sinusoidal_embedding(tpos, d.step_embedding_dim))))));

  std::vector<std::size_t> to_feat(N), from_feat(N);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = 0; l < L; ++l) {
        const std::size_t tok = (b * K + k) * L + l;
        const std::size_t f = (b * L + l) * K + k;
        to_feat[f] = tok;
        from_feat[tok] = f;
      }

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<Var> skips;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    auto y = add(h, repeat_rows(layer.step_proj(tape, step_emb), K * L));
    y = layer.time_layer(tape, y, L);
    if (K > 1) y = gather_rows(layer.feature_layer(tape, gather_rows(y, to_feat), K), from_feat);
    y = temporal_conv(y, tape.parameter(*layer.conv_w), tape.parameter(*layer.conv_b), L);
    y = add(y, ctx.side_proj[i]);
    auto gated = mul(sigmoid(slice_cols(y, 0, C)), tanh(slice_cols(y, C, C)));
    y = layer.out_proj(tape, gated);
    h = scale(add(h, slice_cols(y, 0, C)), inv_sqrt2);
    skips.push_back(slice_cols(y, C, C));
  }
  auto agg = skips[0];
  for (std::size_t i = 1; i < skips.size(); ++i) agg = add(agg, skips[i]);
  agg = scale(agg, 1.0 / std::sqrt(static_cast<double>(skips.size())));
  auto out = out2_(tape, relu(out1_(tape, agg)));
  return reshape(out, {B, K, L});
}

Var LscdModel::forward(Tape& tape, Var x_t, const Conditioning& c, const std::vector<std::size_t>& steps) const {
  if (!config_.use_spectrum) return denoise(tape, x_t, c, steps, nullptr);
  const Shape3 s = c.cond_mask.shape();
  auto z = encode(tape, tape.constant(Tensor({s.batch, s.channels, s.steps}, c.cond_values.data())), c);
  return denoise(tape, x_t, c, steps, &z);
}

void LscdModel::save(const std::filesystem::path& prefix, const nlohmann::json& extra) const {
  nlohmann::json meta{{"model_config", config_.to_json()}, {"stats", lscd::to_json(stats)}, {"extra", extra}};
  save_checkpoint(params_, prefix, meta);
}

std::unique_ptr<LscdModel> LscdModel::load(const std::filesystem::path& prefix, nlohmann::json* extra) {
  const auto manifest = io::read_json(std::filesystem::path(prefix.string() + ".json"));
  const auto& meta = manifest.at("extra");
  auto model = std::make_unique<LscdModel>(ModelConfig::from_json(meta.at("model_config")));
  load_checkpoint(model->params_, prefix);
  model->stats = stats_from_json(meta.at("stats"));
  if (extra) *extra = meta.at("extra");
  return model;
}

}  // namespace lscd::diffusion
