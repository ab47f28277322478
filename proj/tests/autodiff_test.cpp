#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <numeric>

#include "lscd/autodiff/layers.hpp"
#include "lscd/autodiff/ls_op.hpp"
#include "lscd/autodiff/optim.hpp"
#include "test_util.hpp"

namespace lscd::ad {
namespace {

using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;

Tensor random_tensor(Shape s, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(s));
  for (auto& v : t.data) v = scale * standard_normal(rng);
  return t;
}

// Relative L2 error between the analytic gradient of <R, f(inputs)> and
// central differences with step 1e-5.
double grad_check(const Builder& f, std::vector<Tensor> inputs, std::uint64_t seed) {
  ParameterStore store;
  for (std::size_t i = 0; i < inputs.size(); ++i) store.add("p" + std::to_string(i), inputs[i]);
  Tensor weights;
  auto run = [&](bool backward) {
    Tape tape;
    std::vector<Var> vars;
    for (auto* p : store.all()) vars.push_back(tape.parameter(*p));
    auto out = f(tape, vars);
    if (weights.size() != out.value().size()) {
      Rng rng(seed);
      weights = random_tensor(out.shape(), rng);
    }
    auto loss = sum(mul(out, tape.constant(weights)));
    if (backward) tape.backward(loss);
    return loss.value()[0];
  };
  store.zero_grad();
  run(true);
  double num = 0.0, den = 0.0;
  for (auto* p : store.all()) {
    for (std::size_t j = 0; j < p->value.size(); ++j) {
      const double x0 = p->value[j];
      p->value[j] = x0 + 1e-5;
      const double up = run(false);
      p->value[j] = x0 - 1e-5;
      const double dn = run(false);
      p->value[j] = x0;
      const double fd = (up - dn) / 2e-5;
      num += (fd - p->grad[j]) * (fd - p->grad[j]);
      den += fd * fd;
    }
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-8);
}

struct OpCase {
  const char* name;
  std::function<std::pair<Builder, std::vector<Tensor>>(Rng&)> make;
};

std::size_t dim(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(hi - lo + 1)) % (hi - lo + 1);
}

std::vector<OpCase> op_cases() {
  auto mat = [](Rng& rng) { return Shape{dim(rng, 1, 5), dim(rng, 1, 5)}; };
  auto unary = [mat](Var (*op)(Var)) {
    return [mat, op](Rng& rng) {
      return std::pair<Builder, std::vector<Tensor>>{[op](Tape&, const std::vector<Var>& v) { return op(v[0]); },
                                                     {random_tensor(mat(rng), rng)}};
    };
  };
  std::vector<OpCase> cases{
      {"relu", unary(relu)},       {"gelu", unary(gelu)},
      {"sigmoid", unary(sigmoid)}, {"tanh", unary(tanh)},
      {"silu", unary(silu)},       {"square", unary(square)},
      {"softmax_rows", unary(softmax_rows)}, {"transpose2d", unary(transpose2d)},
      {"sum", unary(sum)},         {"mean", unary(mean)},
  };
  cases.push_back({"add", [mat](Rng& rng) {
                     auto s = mat(rng);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [](Tape&, const std::vector<Var>& v) { return add(v[0], v[1]); },
                         {random_tensor(s, rng), random_tensor(s, rng)}};
                   }});
  cases.push_back({"add_broadcast", [mat](Rng& rng) {
                     auto s = mat(rng);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [](Tape&, const std::vector<Var>& v) { return add(v[0], v[1]); },
                         {random_tensor(s, rng), random_tensor({s[1]}, rng)}};
                   }});
  cases.push_back({"sub", [mat](Rng& rng) {
                     auto s = mat(rng);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [](Tape&, const std::vector<Var>& v) { return sub(v[0], v[1]); },
                         {random_tensor(s, rng), random_tensor(s, rng)}};
                   }});
  cases.push_back({"mul", [mat](Rng& rng) {
                     auto s = mat(rng);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [](Tape&, const std::vector<Var>& v) { return mul(v[0], v[1]); },
                         {random_tensor(s, rng), random_tensor(s, rng)}};
                   }});
  cases.push_back({"scale_add_scalar", [mat](Rng& rng) {
                     return std::pair<Builder, std::vector<Tensor>>{
                         [](Tape&, const std::vector<Var>& v) { return add_scalar(scale(v[0], -1.7), 0.3); },
                         {random_tensor(mat(rng), rng)}};
                   }});
  cases.push_back({"matmul", [](Rng& rng) {
                     const auto n = dim(rng, 1, 5), m = dim(rng, 1, 5), p = dim(rng, 1, 5);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [](Tape&, const std::vector<Var>& v) { return matmul(v[0], v[1]); },
                         {random_tensor({n, m}, rng), random_tensor({m, p}, rng)}};
                   }});
  cases.push_back({"linear", [](Rng& rng) {
                     const auto n = dim(rng, 1, 5), m = dim(rng, 1, 5), p = dim(rng, 1, 5);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [](Tape&, const std::vector<Var>& v) { return linear(v[0], v[1], v[2]); },
                         {random_tensor({n, m}, rng), random_tensor({m, p}, rng), random_tensor({p}, rng)}};
                   }});
  cases.push_back({"layernorm_rows", [](Rng& rng) {
                     const auto n = dim(rng, 1, 5), c = dim(rng, 2, 6);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [](Tape&, const std::vector<Var>& v) { return layernorm_rows(v[0], v[1], v[2]); },
                         {random_tensor({n, c}, rng), random_tensor({c}, rng), random_tensor({c}, rng)}};
                   }});
  cases.push_back({"reshape", [](Rng& rng) {
                     const auto n = dim(rng, 1, 4), c = dim(rng, 1, 4);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [n, c](Tape&, const std::vector<Var>& v) { return reshape(v[0], {c, n}); },
                         {random_tensor({n, c}, rng)}};
                   }});
  cases.push_back({"gather_rows", [](Rng& rng) {
                     const auto n = dim(rng, 1, 5), c = dim(rng, 1, 4), k = dim(rng, 1, 8);
                     std::vector<std::size_t> idx(k);
                     for (auto& i : idx) i = dim(rng, 0, n - 1);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [idx](Tape&, const std::vector<Var>& v) { return gather_rows(v[0], idx); },
                         {random_tensor({n, c}, rng)}};
                   }});
  cases.push_back({"repeat_rows", [mat](Rng& rng) {
                     const auto r = dim(rng, 1, 4);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [r](Tape&, const std::vector<Var>& v) { return repeat_rows(v[0], r); },
                         {random_tensor(mat(rng), rng)}};
                   }});
  cases.push_back({"shift_rows", [](Rng& rng) {
                     const auto s = dim(rng, 1, 4), g = dim(rng, 1, 3), c = dim(rng, 1, 3);
                     const long off = static_cast<long>(dim(rng, 0, 2)) - 1;
                     return std::pair<Builder, std::vector<Tensor>>{
                         [s, off](Tape&, const std::vector<Var>& v) { return shift_rows(v[0], s, off); },
                         {random_tensor({s * g, c}, rng)}};
                   }});
  cases.push_back({"mean_pool_groups", [](Rng& rng) {
                     const auto s = dim(rng, 1, 4), g = dim(rng, 1, 3), c = dim(rng, 1, 3);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [s](Tape&, const std::vector<Var>& v) { return mean_pool_groups(v[0], s); },
                         {random_tensor({s * g, c}, rng)}};
                   }});
  cases.push_back({"concat_slice", [](Rng& rng) {
                     const auto n = dim(rng, 1, 4), a = dim(rng, 1, 3), b = dim(rng, 1, 3);
                     const auto start = dim(rng, 0, a + b - 1);
                     const auto count = dim(rng, 1, a + b - start);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [start, count](Tape&, const std::vector<Var>& v) {
                           return slice_cols(concat_cols({v[0], v[1]}), start, count);
                         },
                         {random_tensor({n, a}, rng), random_tensor({n, b}, rng)}};
                   }});
  cases.push_back({"masked_fill", [mat](Rng& rng) {
                     auto s = mat(rng);
                     std::vector<std::uint8_t> m(numel(s));
                     for (auto& x : m) x = uniform01(rng) < 0.4;
                     return std::pair<Builder, std::vector<Tensor>>{
                         [m](Tape&, const std::vector<Var>& v) { return masked_fill(v[0], m, 2.5); },
                         {random_tensor(s, rng)}};
                   }});
  cases.push_back({"masked_mse", [mat](Rng& rng) {
                     auto s = mat(rng);
                     std::vector<std::uint8_t> m(numel(s));
                     for (auto& x : m) x = uniform01(rng) < 0.6;
                     m[0] = 1;
                     auto target = random_tensor(s, rng);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [m, target](Tape&, const std::vector<Var>& v) { return masked_mse(v[0], target, m); },
                         {random_tensor(s, rng)}};
                   }});
  cases.push_back({"attention", [](Rng& rng) {
                     const auto s = dim(rng, 1, 4), g = dim(rng, 1, 2), h = dim(rng, 1, 2), dh = dim(rng, 1, 3);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [s, h](Tape&, const std::vector<Var>& v) { return attention(v[0], s, h); },
                         {random_tensor({s * g, 3 * h * dh}, rng)}};
                   }});
  cases.push_back({"temporal_conv", [](Rng& rng) {
                     const auto s = dim(rng, 1, 5), g = dim(rng, 1, 2), ci = dim(rng, 1, 3), co = dim(rng, 1, 3);
                     return std::pair<Builder, std::vector<Tensor>>{
                         [s](Tape&, const std::vector<Var>& v) { return temporal_conv(v[0], v[1], v[2], s); },
                         {random_tensor({s * g, ci}, rng), random_tensor({3 * ci, co}, rng),
                          random_tensor({co}, rng)}};
                   }});
  return cases;
}

TEST(Ops, GradientsMatchFiniteDifferences) {
  for (const auto& c : op_cases()) {
    double worst = 0.0;
    for (std::uint64_t shape_seed = 0; shape_seed < 20; ++shape_seed) {
      Rng rng(derive_seed(shape_seed, std::hash<std::string>{}(c.name) % 1000));
      auto [f, inputs] = c.make(rng);
      worst = std::max(worst, grad_check(f, inputs, shape_seed));
    }
    EXPECT_LT(worst, 1e-4) << c.name;
  }
}

TEST(Ops, HandComputedForwardValues) {
  Tape tape;
  auto u = softmax_rows(tape.constant(Tensor({2, 4}, 3.0)));
  for (double v : u.value().data) EXPECT_DOUBLE_EQ(v, 0.25);
  Rng rng(1);
  auto a = random_tensor({3, 3}, rng);
  Tensor eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
  auto prod = matmul(tape.constant(a), tape.constant(eye));
  EXPECT_EQ(prod.value().data, a.data);
  EXPECT_THROW(matmul(tape.constant(a), tape.constant(Tensor({2, 3}))), ShapeError);
  EXPECT_THROW(attention(tape.constant(Tensor({4, 9})), 2, 2), ShapeError);
}

TEST(Attention, SingleTokenReturnsValues) {
  Rng rng(2);
  auto x = random_tensor({5, 12}, rng);
  Tape tape;
  auto y = attention(tape.constant(x), 1, 2);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(y.value().at(r, c), x.at(r, 8 + c));
}

TEST(Attention, TransformerLayerIsPermutationEquivariant) {
  Rng rng(3);
  ParameterStore store;
  auto layer = TransformerLayer::create(store, "t", 8, 2, 16, rng);
  const std::size_t S = 7;
  auto x = random_tensor({S, 8}, rng);
  std::vector<std::size_t> perm(S);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Tape tape;
  auto y = layer(tape, tape.constant(x), S);
  auto yp = layer(tape, gather_rows(tape.constant(x), perm), S);
  std::vector<std::size_t> inv(S);
  for (std::size_t i = 0; i < S; ++i) inv[perm[i]] = i;
  auto back = gather_rows(yp, inv);
  for (std::size_t i = 0; i < y.value().size(); ++i) EXPECT_NEAR(back.value()[i], y.value()[i], 1e-10);
}

TEST(Attention, TransformerLayerGradient) {
  Rng rng(4);
  ParameterStore store;
  auto layer = TransformerLayer::create(store, "t", 4, 2, 6, rng);
  // Larger weights than the default init so every path contributes.
  for (auto* p : store.all())
    for (auto& v : p->value.data) v += 0.3 * standard_normal(rng);
  auto x = random_tensor({6, 4}, rng);
  Tensor w = random_tensor({6, 4}, rng);
  auto loss_of = [&](bool backward) {
    Tape tape;
    auto out = layer(tape, tape.constant(x), 3);
    auto loss = sum(mul(out, tape.constant(w)));
    if (backward) tape.backward(loss);
    return loss.value()[0];
  };
  store.zero_grad();
  loss_of(true);
  double num = 0, den = 0;
  for (auto* p : store.all())
    for (std::size_t j = 0; j < p->value.size(); ++j) {
      const double x0 = p->value[j];
      p->value[j] = x0 + 1e-5;
      const double up = loss_of(false);
      p->value[j] = x0 - 1e-5;
      const double dn = loss_of(false);
      p->value[j] = x0;
      const double fd = (up - dn) / 2e-5;
      num += (fd - p->grad[j]) * (fd - p->grad[j]);
      den += fd * fd;
    }
  EXPECT_LT(std::sqrt(num / den), 1e-4);
}

TEST(LsOp, FeatureGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto batch = testing::random_batch({2, 2, 12}, seed, 0.8);
    LsFeatureSpec spec{batch.timestamps, batch.obs_mask, FrequencyGrid::linear(6, 0.1, 1.0), {}, seed % 2 == 0};
    Tensor x({2, 2, 12}, batch.values.data());
    const double err = grad_check(
        [&spec](Tape&, const std::vector<Var>& v) { return ls_feature(v[0], spec); }, {x}, seed);
    EXPECT_LT(err, 1e-4);
  }
}

TEST(Adam, MatchesScalarReference) {
  ParameterStore store;
  auto& p = store.add("w", Tensor({3}, std::vector<double>{1.0, -2.0, 0.5}));
  Adam adam;
  std::vector<double> w{1.0, -2.0, 0.5}, m(3, 0.0), v(3, 0.0);
  const std::vector<double> c{0.3, 0.1, -0.7};
  for (int t = 1; t <= 100; ++t) {
    for (std::size_t i = 0; i < 3; ++i) p.grad[i] = 2.0 * (p.value[i] - c[i]) * (i + 1);
    adam.step(store);
    for (std::size_t i = 0; i < 3; ++i) {
      const double g = 2.0 * (w[i] - c[i]) * (i + 1);
      m[i] = 0.9 * m[i] + 0.1 * g;
      v[i] = 0.999 * v[i] + 0.001 * g * g;
      const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
      w[i] -= 1e-3 * mh / (std::sqrt(vh) + 1e-8);
    }
  }
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p.value[i], w[i], 1e-10);
}

TEST(Adam, HandComputedSteps) {
  ParameterStore store;
  auto& p = store.add("w", Tensor({1}, 1.0));
  Adam adam;
  adam.step(store);  // zero gradient
  EXPECT_EQ(p.value[0], 1.0);
  p.grad[0] = 2.0;  // d(w^2)/dw at 1
  adam.step(store);
  EXPECT_LT(std::abs(p.value[0]), 1.0);
  p.grad[0] = std::nan("");
  EXPECT_THROW(adam.step(store), DivergenceError);
}

TEST(Checkpoint, ExactRoundTrip) {
  Rng rng(5);
  ParameterStore a, b;
  TransformerLayer::create(a, "t", 8, 2, 16, rng);
  TransformerLayer::create(b, "t", 8, 2, 16, rng);
  a.get("t.qkv.w").value[0] = 1.0 / 3.0;
  const auto dir = std::filesystem::temp_directory_path() / "lscd_ckpt_test";
  save_checkpoint(a, dir / "model", {{"epoch", 3}});
  auto extra = load_checkpoint(b, dir / "model");
  EXPECT_EQ(extra["epoch"], 3);
  for (std::size_t i = 0; i < a.all().size(); ++i) EXPECT_EQ(a.all()[i]->value.data, b.all()[i]->value.data);
  ParameterStore c;
  Linear::create(c, "other", 2, 2, rng);
  EXPECT_THROW(load_checkpoint(c, dir / "model"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace lscd::ad
