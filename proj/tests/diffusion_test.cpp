#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "lscd/autodiff/ops.hpp"
#include "lscd/core/normalize.hpp"
#include "lscd/diffusion/sampler.hpp"
#include "lscd/diffusion/train.hpp"
#include "lscd/synth/sines.hpp"
#include "test_util.hpp"

namespace lscd::diffusion {
namespace {

ModelConfig tiny_config(std::size_t K, const TimeSeriesBatch& batch, std::uint64_t seed = 1) {
  ModelConfig c;
  c.n_channels = K;
  c.encoder = {8, 2, 1, 1, true};
  c.denoiser = {8, 1, 2, 8, 8, 8, 4};
  c.grid_omegas = FrequencyGrid::default_for(batch).omegas();
  c.steps = 10;
  c.init_seed = seed;
  return c;
}

TimeSeriesBatch small_sines(std::size_t n, std::size_t K, std::uint64_t seed, std::size_t L = 12) {
  synth::SinesConfig cfg;
  cfg.n_samples = n;
  cfg.length = L;
  cfg.horizon = static_cast<double>(L) / 10.0;
  cfg.channels.resize(K);
  cfg.seed = seed;
  auto batch = synth::generate_sines(cfg).batch;
  Rng rng(seed);
  for (auto& m : batch.obs_mask.data()) m = uniform01(rng) < 0.8;
  return batch;
}

TEST(Schedule, ClosedForms) {
  auto one = make_schedule(1);
  EXPECT_DOUBLE_EQ(one.alpha(1), 1.0 - one.beta(1));
  EXPECT_DOUBLE_EQ(one.sigma2(1), one.beta(1));
  auto s = make_schedule(50);
  EXPECT_NEAR(s.beta(1), 1e-4, 1e-18);
  EXPECT_NEAR(s.beta(50), 0.5, 1e-15);
  for (std::size_t t = 2; t <= 50; ++t) {
    EXPECT_LT(s.alpha(t), s.alpha(t - 1));
    EXPECT_NEAR(s.sigma2(t), (1 - s.alpha(t - 1)) / (1 - s.alpha(t)) * s.beta(t), 1e-16);
  }
  EXPECT_GT(s.alpha(50), 0.0);
  // sqrt-linear interpolation midpoint
  const double r = std::sqrt(1e-4) + (std::sqrt(0.5) - std::sqrt(1e-4)) * 10.0 / 49.0;
  EXPECT_NEAR(s.beta(11), r * r, 1e-16);
  auto lin = make_schedule(5, ScheduleKind::linear, 0.1, 0.5);
  EXPECT_NEAR(lin.beta(3), 0.3, 1e-16);
  EXPECT_THROW(make_schedule(0), ValueError);
}

TEST(ForwardNoise, Limits) {
  Rng rng(1);
  Values x0(Shape3{2, 1, 50});
  for (auto& v : x0.data()) v = standard_normal(rng);
  Mask all(x0.shape(), 1);
  auto near_one = make_schedule(1, ScheduleKind::linear, 1e-14, 1e-14);
  auto n1 = forward_noise(x0, all, {1, 1}, near_one, rng);
  for (std::size_t i = 0; i < x0.size(); ++i) EXPECT_NEAR(n1.x_t[i], x0[i], 1e-6);
  auto s = make_schedule(50);
  Values zero(x0.shape());
  auto n2 = forward_noise(zero, all, {7, 30}, s, rng);
  for (std::size_t l = 0; l < 50; ++l) {
    EXPECT_DOUBLE_EQ(n2.x_t(0, 0, l), std::sqrt(1 - s.alpha(7)) * n2.eps(0, 0, l));
    EXPECT_DOUBLE_EQ(n2.x_t(1, 0, l), std::sqrt(1 - s.alpha(30)) * n2.eps(1, 0, l));
  }
  Mask none(x0.shape(), 0);
  auto n3 = forward_noise(x0, none, {3, 3}, s, rng);
  for (double v : n3.x_t.data()) EXPECT_EQ(v, 0.0);
}

TEST(ForwardNoise, VarianceMonteCarlo) {
  auto s = make_schedule(50);
  Rng rng(2);
  const std::size_t n = 100000;
  Values x0(Shape3{1, 1, n});
  for (auto& v : x0.data()) v = 2.0 * standard_normal(rng);  // Var = 4
  for (std::size_t t : {1u, 10u, 25u, 50u}) {
    auto r = forward_noise(x0, Mask(x0.shape(), 1), {t}, s, rng);
    double m = 0, v = 0;
    for (double x : r.x_t.data()) m += x;
    m /= n;
    for (double x : r.x_t.data()) v += (x - m) * (x - m);
    v /= n;
    double v0 = 0, m0 = 0;
    for (double x : x0.data()) m0 += x;
    m0 /= n;
    for (double x : x0.data()) v0 += (x - m0) * (x - m0);
    v0 /= n;
    const double expect = s.alpha(t) * v0 + (1 - s.alpha(t));
    EXPECT_NEAR(v / expect, 1.0, 0.02) << "t=" << t;
  }
}

TEST(Sampler, LinearToyDenoiserMatchesScalarTrajectory) {
  auto s = make_schedule(20);
  const Shape3 shape{2, 2, 5};
  Values cond(shape);
  Mask cm(shape, 0);
  Rng fill(3);
  for (std::size_t i = 0; i < cond.size(); ++i)
    if (uniform01(fill) < 0.4) {
      cm[i] = 1;
      cond[i] = standard_normal(fill);
    }
  const double a = 0.3, b = -0.01;
  EpsPredictor toy = [&](const Values& x, const std::vector<std::size_t>& t) {
    Values e(x.shape());
    for (std::size_t bb = 0; bb < shape.batch; ++bb)
      for (std::size_t k = 0; k < shape.channels; ++k)
        for (std::size_t l = 0; l < shape.steps; ++l)
          e(bb, k, l) = a * x(bb, k, l) + b * static_cast<double>(t[bb]);
    return e;
  };
  Rng rng(11), replay(11);
  auto got = reverse_sample(cond, cm, toy, s, 0.0, rng);
  std::vector<double> x(cond.size());
  for (auto& v : x) v = standard_normal(replay);
  for (std::size_t i = 0; i < cond.size(); ++i) {
    if (cm[i]) {
      EXPECT_EQ(got[i], cond[i]);
      continue;
    }
    double xi = x[i];
    for (std::size_t t = 20; t >= 1; --t) {
      const double eps = a * xi + b * static_cast<double>(t);
      xi = (xi - s.beta(t) / std::sqrt(1 - s.alpha(t)) * eps) / std::sqrt(1 - s.beta(t));
    }
    EXPECT_NEAR(got[i], xi, 1e-8);
  }
}

TEST(Sampler, OracleDenoiserSingleStepRecoversX0) {
  auto s = make_schedule(1, ScheduleKind::quadratic, 0.02, 0.02);
  const Shape3 shape{1, 1, 4000};
  Rng rng(5);
  Values x0(shape);
  for (auto& v : x0.data()) v = 3.0 * standard_normal(rng);
  Mask cm(shape, 0);
  EpsPredictor oracle = [&](const Values& x, const std::vector<std::size_t>&) {
    Values e(shape);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = (x[i] - std::sqrt(s.alpha(1)) * x0[i]) / std::sqrt(1 - s.alpha(1));
    return e;
  };
  Rng r0(6);
  auto exact = reverse_sample(Values(shape), cm, oracle, s, 0.0, r0);
  for (std::size_t i = 0; i < exact.size(); ++i) EXPECT_NEAR(exact[i], x0[i], 1e-12);
  Rng r1(7);
  auto noisy = reverse_sample(Values(shape), cm, oracle, s, 1.0, r1);
  double var = 0;
  for (std::size_t i = 0; i < noisy.size(); ++i) var += (noisy[i] - x0[i]) * (noisy[i] - x0[i]);
  var /= static_cast<double>(noisy.size());
  EXPECT_NEAR(var / s.sigma2(1), 1.0, 0.1);
}

TEST(Sampler, MedianOfDraws) {
  std::vector<Values> d;
  for (double v : {3.0, 1.0, 2.0, 10.0}) d.push_back(Values(Shape3{1, 1, 1}, v));
  EXPECT_EQ(median_of(d)[0], 2.5);
  d.pop_back();
  EXPECT_EQ(median_of(d)[0], 2.0);
}

TEST(Training, PerfectOracleLossIsZero) {
  auto batch = small_sines(3, 2, 1);
  auto s = make_schedule(10);
  Rng rng(2);
  auto n = forward_noise(batch.values, batch.obs_mask, {1, 5, 10}, s, rng);
  ad::Tape tape;
  ad::Tensor eps({3, 2, 12}, n.eps.data());
  auto loss = ad::masked_mse(tape.constant(eps), eps, batch.obs_mask.data());
  EXPECT_EQ(loss.value()[0], 0.0);
}

TEST(Model, UntrainedLossNearOne) {
  auto batch = small_sines(32, 2, 2);
  LscdModel model(tiny_config(2, batch));
  model.stats = compute_stats(batch);
  auto norm = apply_normalization(batch, model.stats);
  TrainConfig cfg;
  cfg.mask_ratio = 0.5;
  Rng rng(3);
  auto r = training_objective(model, norm, cfg, rng, nullptr, 1.0, 0.0, false);
  EXPECT_GT(r.loss, 0.7);
  EXPECT_LT(r.loss, 1.3);
}

TEST(Model, DeterministicShapeAndSaveLoad) {
  auto batch = small_sines(3, 2, 4);
  LscdModel model(tiny_config(2, batch));
  auto cond = make_conditioning(batch, batch.obs_mask);
  Values xt(batch.shape(), 0.1);
  auto run = [&](const LscdModel& m) {
    ad::Tape tape(false);
    return m.forward(tape, tape.constant(ad::Tensor({3, 2, 12}, xt.data())), cond, {1, 4, 9}).value();
  };
  auto a = run(model), b = run(model);
  EXPECT_EQ(a.data, b.data);
  EXPECT_EQ(a.shape, (ad::Shape{3, 2, 12}));
  const auto dir = std::filesystem::temp_directory_path() / "lscd_model_test";
  model.stats.mean = {0.5, -1.0};
  model.save(dir / "m", {{"note", 1}});
  nlohmann::json extra;
  auto loaded = LscdModel::load(dir / "m", &extra);
  EXPECT_EQ(run(*loaded).data, a.data);
  EXPECT_EQ(loaded->stats.mean, model.stats.mean);
  EXPECT_EQ(extra["note"], 1);
  std::filesystem::remove_all(dir);
}

TEST(Encoder, PermutationEquivariantWithoutFeatureAttention) {
  auto batch = small_sines(2, 3, 5);
  auto cfg = tiny_config(3, batch);
  cfg.encoder.feature_attention = false;
  LscdModel model(cfg);
  auto encode = [&](const TimeSeriesBatch& b) {
    auto c = make_conditioning(b, b.obs_mask);
    ad::Tape tape(false);
    return model.encode(tape, tape.constant(ad::Tensor({2, 3, 12}, c.cond_values.data())), c).value();
  };
  const std::vector<std::size_t> perm{2, 0, 1};
  auto permuted = batch;
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t l = 0; l < 12; ++l) {
        permuted.values(b, k, l) = batch.values(b, perm[k], l);
        permuted.obs_mask(b, k, l) = batch.obs_mask(b, perm[k], l);
      }
  auto z = encode(batch), zp = encode(permuted);
  EXPECT_EQ(z.data, encode(batch).data);
  const std::size_t D = 8;
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t d = 0; d < D; ++d) EXPECT_NEAR(zp.at(b * 3 + k, d), z.at(b * 3 + perm[k], d), 1e-12);
}

TEST(Encoder, GradientReachesRawValues) {
  auto batch = small_sines(2, 2, 6);
  LscdModel model(tiny_config(2, batch));
  auto c = make_conditioning(batch, batch.obs_mask);
  ad::ParameterStore raw;
  auto& x = raw.add("x", ad::Tensor({2, 2, 12}, c.cond_values.data()));
  ad::Tape tape;
  auto z = model.encode(tape, tape.parameter(x), c);
  tape.backward(ad::sum(ad::square(z)));
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < x.grad.size(); ++i) {
    if (!batch.obs_mask[i]) {
      EXPECT_EQ(x.grad[i], 0.0);
    }
    nonzero += x.grad[i] != 0.0;
  }
  EXPECT_GT(nonzero, 0u);
}

// Directional derivative of the objective along a random parameter direction
// against central differences with identical random draws.
double directional_error(LscdModel& model, const TimeSeriesBatch& norm, const TrainConfig& cfg, bool spectral) {
  Rng perturb(9);
  for (auto* p : model.params().all())
    for (auto& v : p->value.data) v += 0.2 * standard_normal(perturb);
  auto objective = [&](bool backward) {
    Rng m(derive_seed(1, 1)), sc(derive_seed(1, 2));
    auto r = training_objective(model, norm, cfg, m, spectral ? &sc : nullptr, 1.0, 0.5, backward);
    return r.loss + (spectral ? 0.5 * r.s_cons : 0.0);
  };
  model.params().zero_grad();
  objective(true);
  std::vector<std::vector<double>> dir;
  double analytic = 0.0;
  for (auto* p : model.params().all()) {
    std::vector<double> d(p->value.size());
    for (std::size_t j = 0; j < d.size(); ++j) {
      d[j] = standard_normal(perturb);
      analytic += d[j] * p->grad[j];
    }
    dir.push_back(std::move(d));
  }
  auto shift = [&](double h) {
    auto& ps = model.params().all();
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = 0; j < dir[i].size(); ++j) ps[i]->value[j] += h * dir[i][j];
  };
  const double h = 1e-5;
  shift(h);
  const double up = objective(false);
  shift(-2 * h);
  const double dn = objective(false);
  shift(h);
  const double fd = (up - dn) / (2 * h);
  return std::abs(fd - analytic) / std::max(std::abs(fd), 1e-8);
}

TEST(Training, EndToEndGradientCheck) {
  auto batch = small_sines(2, 2, 7);
  TrainConfig cfg;
  cfg.mask_ratio = 0.5;
  cfg.truncation = 2;
  for (bool spectral : {false, true}) {
    LscdModel model(tiny_config(2, batch));
    model.stats = compute_stats(batch);
    auto norm = apply_normalization(batch, model.stats);
    EXPECT_LT(directional_error(model, norm, cfg, spectral), 1e-3) << "spectral=" << spectral;
  }
}

TEST(Training, SconsOfExactReconstructionIsZero) {
  auto batch = small_sines(3, 2, 8);
  LscdModel model(tiny_config(2, batch));
  ad::Tape tape;
  auto x = tape.constant(ad::Tensor({3, 2, 12}, batch.values.data()));
  auto loss = scons_loss(tape, x, batch.values, batch.timestamps, batch.obs_mask, model);
  EXPECT_EQ(loss.value()[0], 0.0);
}

TEST(Training, FinetuneWithoutSconsMatchesTrainMainFirstUpdate) {
  auto batch = small_sines(8, 2, 9);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  cfg.lambda1 = 1.0;
  cfg.lambda2 = 0.0;
  cfg.truncation = 2;
  LscdModel a(tiny_config(2, batch)), b(tiny_config(2, batch));
  train_main(a, batch, TimeSeriesBatch{}, cfg);
  b.stats = compute_stats(batch);
  finetune_spectral(b, batch, TimeSeriesBatch{}, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.params().all().size(); ++i) {
    const auto& pa = a.params().all()[i]->value.data;
    const auto& pb = b.params().all()[i]->value.data;
    for (std::size_t j = 0; j < pa.size(); ++j) worst = std::max(worst, std::abs(pa[j] - pb[j]));
  }
  EXPECT_LE(worst, 1e-10);
  // And the update is not trivially zero.
  LscdModel fresh(tiny_config(2, batch));
  EXPECT_NE(fresh.params().all()[0]->value.data, a.params().all()[0]->value.data);
}

TEST(Sampling, ConditionEntriesHeldExactly) {
  auto batch = small_sines(5, 2, 10);
  auto cfg = tiny_config(2, batch);
  LscdModel model(cfg);
  model.stats = compute_stats(batch);
  Rng rng(4);
  auto split = make_conditional_split(batch, SplitStrategy::uniform_random, 0.5, rng);
  SampleOptions opt;
  opt.n_draws = 3;
  opt.chunk = 2;
  auto poisoned = batch;
  poisoned.values = testing::poison(batch.values, split.cond_mask);
  Rng r1(8), r2(8);
  auto res = sample_impute(model, poisoned, split.cond_mask, opt, r1);
  auto again = sample_impute(model, batch, split.cond_mask, opt, r2);
  for (const auto& d : res.draws) {
    EXPECT_TRUE(testing::all_finite(d));
    for (std::size_t i = 0; i < d.size(); ++i)
      if (split.cond_mask[i]) {
        EXPECT_EQ(d[i], batch.values[i]);
      }
  }
  EXPECT_EQ(res.median, again.median);
}

}  // namespace
}  // namespace lscd::diffusion
