#include "lscd/diffusion/train.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <numeric>

#include "lscd/core/normalize.hpp"
#include "lscd/lombscargle/periodogram.hpp"

namespace lscd::diffusion {

using namespace lscd::ad;

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},     {"batch_size", batch_size}, {"lr", lr},
          {"seed", seed},         {"split", to_string(split)}, {"mask_ratio", mask_ratio},
          {"mask_ratio_policy", mask_ratio < 0 ? "uniform-per-batch" : "fixed"},
          {"lambda1", lambda1},   {"lambda2", lambda2},       {"truncation", truncation}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.seed = j.value("seed", c.seed);
  c.split = parse_split_strategy(j.value("split", to_string(c.split)));
  c.mask_ratio = j.value("mask_ratio", c.mask_ratio);
  c.lambda1 = j.value("lambda1", c.lambda1);
  c.lambda2 = j.value("lambda2", c.lambda2);
  c.truncation = j.value("truncation", c.truncation);
  if (c.batch_size < 1) throw ValueError("train: batch_size must be >= 1");
  if (c.mask_ratio > 1.0) throw ValueError("train: mask_ratio must be <= 1");
  if (c.lambda1 < 0 || c.lambda2 < 0) throw ValueError("train: lambda weights must be >= 0");
  if (c.truncation < 1) throw ValueError("train: truncation must be >= 1");
  return c;
}

nlohmann::json LossRecord::to_json() const {
  return {{"epoch", epoch}, {"split", split}, {"loss", loss}, {"s_cons", s_cons}};
}

namespace {

Tensor tensor_of(const Values& v) {
  const Shape3 s = v.shape();
  return Tensor({s.batch, s.channels, s.steps}, v.data());
}

Tensor mask_tensor(const Mask& m) {
  const Shape3 s = m.shape();
  Tensor t({s.batch, s.channels, s.steps});
  for (std::size_t i = 0; i < m.size(); ++i) t[i] = m[i] ? 1.0 : 0.0;
  return t;
}

}  // namespace

Var scons_loss(Tape& tape, Var x_hat, const Values& x0, const std::vector<double>& timestamps, const Mask& obs_mask,
               const LscdModel& model) {
  const auto& cfg = model.config();
  LsFeatureSpec spec{timestamps, obs_mask, model.grid(), cfg.feature, cfg.center_spectrum};
  auto p = ls::periodogram(x0, timestamps, obs_mask, spec.grid, spec.center);
  auto target = ls::spectral_feature(p.power, spec.options);
  const Shape3 s = obs_mask.shape();
  Tensor tgt({s.batch * s.channels, spec.grid.size()}, std::move(target.data()));
  auto diff = sub(ls_feature(x_hat, spec), tape.constant(std::move(tgt)));
  return scale(sum(square(diff)), 1.0 / static_cast<double>(s.batch));
}

StepLosses training_objective(const LscdModel& model, const TimeSeriesBatch& batch, const TrainConfig& cfg,
                              Rng& main_rng, Rng* scons_rng, double lambda1, double lambda2, bool backward) {
  const Shape3 s = batch.shape();
  const double ratio = cfg.mask_ratio < 0 ? uniform01(main_rng) : cfg.mask_ratio;
  const auto split = make_conditional_split(batch, cfg.split, ratio, main_rng);
  std::vector<std::size_t> steps(s.batch);
  const std::size_t T = model.schedule().steps();
  for (auto& t : steps) t = 1 + static_cast<std::size_t>(uniform01(main_rng) * static_cast<double>(T)) % T;
  auto noised = forward_noise(batch.values, split.target_mask, steps, model.schedule(), main_rng);
  StepLosses out;
  if (split.target_count() == 0) {
    out.skipped = true;
    return out;
  }
  const auto cond = make_conditioning(batch, split.cond_mask);

  Tape tape(backward);
  std::optional<Var> z;
  if (model.config().use_spectrum) z = model.encode(tape, tape.constant(tensor_of(cond.cond_values)), cond);
  const auto ctx = model.context(tape, cond, z ? &*z : nullptr);
  auto eps_hat = model.denoise(tape, tape.constant(tensor_of(noised.x_t)), cond, steps, ctx);
  auto loss = masked_mse(eps_hat, tensor_of(noised.eps), split.target_mask.data());
  out.loss = loss.value()[0];
  Var total = loss;

  if (scons_rng) {
    total = scale(loss, lambda1);
    // Truncated differentiable reverse pass from a forward-noised x_0.
    const auto& sch = model.schedule();
    const std::size_t t0 = std::min(cfg.truncation, T);
    std::vector<std::size_t> start(s.batch, t0);
    auto init = forward_noise(batch.values, split.target_mask, start, sch, *scons_rng);
    const Tensor tmask = mask_tensor(split.target_mask);
    Var x = tape.constant(tensor_of(init.x_t));
    for (std::size_t t = t0; t >= 1; --t) {
      auto e = model.denoise(tape, x, cond, std::vector<std::size_t>(s.batch, t), ctx);
      const double beta = sch.beta(t);
      const double c_eps = beta / std::sqrt(1.0 - sch.alpha(t));
      const double c_out = 1.0 / std::sqrt(1.0 - beta);
      const double sigma = std::sqrt(sch.sigma2(t));
      Tensor noise({s.batch, s.channels, s.steps});
      for (auto& v : noise.data) v = sigma * standard_normal(*scons_rng);
      x = mul(add(scale(sub(x, scale(e, c_eps)), c_out), tape.constant(std::move(noise))), tape.constant(tmask));
    }
    auto x_hat = add(x, tape.constant(tensor_of(cond.cond_values)));
    auto sc = scons_loss(tape, x_hat, batch.values, batch.timestamps, batch.obs_mask, model);
    out.s_cons = sc.value()[0];
    total = add(total, scale(sc, lambda2));
  }
  if (!std::isfinite(out.loss) || !std::isfinite(out.s_cons))
    throw DivergenceError("training: non-finite loss (loss=" + std::to_string(out.loss) +
                          ", s_cons=" + std::to_string(out.s_cons) + ")");
  if (backward) tape.backward(total);
  return out;
}

namespace {

TrainResult run(LscdModel& model, const TimeSeriesBatch& train_raw, const TimeSeriesBatch& val_raw,
                const TrainConfig& cfg, bool spectral, const EpochCallback& on_epoch) {
  if (train_raw.batch() == 0) throw ValueError("training: empty training set");
  const auto train = apply_normalization(train_raw, model.stats);
  const auto val = val_raw.batch() ? apply_normalization(val_raw, model.stats) : TimeSeriesBatch{};
  Adam adam(AdamConfig{cfg.lr});
  TrainResult result;
  result.best_objective = INFINITY;
  std::vector<ad::Storage> best;
  // The denoising-loss stream is shared with train_main so that lambda2 = 0
  // reproduces its updates; the reverse pass draws from its own stream.
  Rng main_rng(derive_seed(cfg.seed, 0x7a));
  Rng scons_rng(derive_seed(cfg.seed, 0x7b));
  const double l1 = spectral ? cfg.lambda1 : 1.0;
  const double l2 = spectral ? cfg.lambda2 : 0.0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(train.batch());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(cfg.seed, 1000 + epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0, scons_sum = 0.0;
    std::size_t n = 0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - first);
      const auto mb = train.select(std::span<const std::size_t>(order.data() + first, count));
      model.params().zero_grad();
      auto r = training_objective(model, mb, cfg, main_rng, spectral ? &scons_rng : nullptr, l1, l2, true);
      if (r.skipped) continue;
      adam.step(model.params());
      loss_sum += r.loss;
      scons_sum += r.s_cons;
      ++n;
    }
    result.trace.push_back({epoch, "train", n ? loss_sum / n : 0.0, n ? scons_sum / n : 0.0});

    double objective = n ? l1 * loss_sum / n + l2 * scons_sum / n : INFINITY;
    if (val.batch() > 0) {
      // Same draws every epoch so validation losses are comparable.
      Rng vm(derive_seed(cfg.seed, 0x5a1));
      Rng vs(derive_seed(cfg.seed, 0x5a2));
      double vl = 0.0, vsc = 0.0;
      std::size_t vn = 0;
      for (std::size_t first = 0; first < val.batch(); first += cfg.batch_size) {
        const std::size_t count = std::min(cfg.batch_size, val.batch() - first);
        auto r = training_objective(model, val.slice(first, count), cfg, vm, spectral ? &vs : nullptr, l1, l2, false);
        if (r.skipped) continue;
        vl += r.loss;
        vsc += r.s_cons;
        ++vn;
      }
      if (vn) {
        result.trace.push_back({epoch, "val", vl / vn, vsc / vn});
        objective = l1 * vl / vn + l2 * vsc / vn;
      }
    }
    const bool is_best = objective < result.best_objective;
    if (is_best) {
      result.best_objective = objective;
      result.best_epoch = epoch;
      best.clear();
      for (const auto* p : model.params().all()) best.push_back(p->value.data);
    }
    if (on_epoch) on_epoch(epoch, model, is_best);
  }
  if (!best.empty()) {
    auto& ps = model.params().all();
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value.data = best[i];
  }
  return result;
}

}  // namespace

TrainResult train_main(LscdModel& model, const TimeSeriesBatch& train, const TimeSeriesBatch& val,
                       const TrainConfig& cfg, const EpochCallback& on_epoch) {
  model.stats = compute_stats(train);
  return run(model, train, val, cfg, false, on_epoch);
}

TrainResult finetune_spectral(LscdModel& model, const TimeSeriesBatch& train, const TimeSeriesBatch& val,
                              const TrainConfig& cfg, const EpochCallback& on_epoch) {
  return run(model, train, val, cfg, true, on_epoch);
}

}  // namespace lscd::diffusion
