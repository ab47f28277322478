#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lscd/core/split.hpp"
#include "lscd/metrics/metrics.hpp"
#include "test_util.hpp"

namespace lscd::metrics {
namespace {

// Scalar centered periodogram over explicit point lists.
std::vector<double> scalar_psd(const std::vector<double>& t, const std::vector<double>& x,
                               const FrequencyGrid& grid) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  std::vector<double> out;
  for (double w : grid.omegas()) {
    double s2 = 0, c2 = 0;
    for (double ti : t) {
      s2 += std::sin(2 * w * ti);
      c2 += std::cos(2 * w * ti);
    }
    const double tau = std::atan2(s2, c2) / (2 * w);
    double yc = 0, ys = 0, cc = 0, ss = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double c = std::cos(w * (t[i] - tau)), s = std::sin(w * (t[i] - tau));
      yc += (x[i] - mean) * c;
      ys += (x[i] - mean) * s;
      cc += c * c;
      ss += s * s;
    }
    out.push_back(0.5 * (yc * yc / std::max(cc, 1e-10) + ys * ys / std::max(ss, 1e-10)));
  }
  return out;
}

struct Case {
  TimeSeriesBatch truth;
  Values pred;
  ConditionalSplit split;
};

Case random_case(std::uint64_t seed) {
  Case c;
  c.truth = testing::random_batch({3, 2, 24}, seed, 0.8);
  Rng rng(seed + 1000);
  c.pred = c.truth.values;
  for (auto& v : c.pred.data()) v += 0.5 * standard_normal(rng);
  c.split = make_conditional_split(c.truth, SplitStrategy::uniform_random, 0.5, rng);
  return c;
}

TEST(PointMetrics, HandComputedCases) {
  auto c = random_case(1);
  EXPECT_EQ(mae(c.truth, c.truth.values, c.split), 0.0);
  EXPECT_EQ(rmse(c.truth, c.truth.values, c.split), 0.0);

  Values v(Shape3{1, 1, 2});
  v[0] = 2.0;
  TimeSeriesBatch one(v, {0.0, 1.0}, Mask(Shape3{1, 1, 2}, 1));
  Mask cond(Shape3{1, 1, 2}, 0);
  cond[1] = 1;
  auto split = split_from_masks(one.obs_mask, cond);
  Values pred = v;
  pred[0] = 3.5;
  EXPECT_DOUBLE_EQ(mae(one, pred, split), 1.5);
  pred[0] = 5.0;
  EXPECT_DOUBLE_EQ(rmse(one, pred, split), 3.0);
  EXPECT_THROW(mae(one, pred, split_from_masks(one.obs_mask, one.obs_mask)), ValueError);
}

TEST(PointMetrics, ScalarOracleAndJensen) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto c = random_case(seed);
    double sa = 0, sq = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < c.pred.size(); ++i)
      if (c.split.target_mask[i]) {
        sa += std::abs(c.truth.values[i] - c.pred[i]);
        sq += (c.truth.values[i] - c.pred[i]) * (c.truth.values[i] - c.pred[i]);
        ++n;
      }
    const double m = mae(c.truth, c.pred, c.split), r = rmse(c.truth, c.pred, c.split);
    EXPECT_NEAR(m, sa / n, 1e-12);
    EXPECT_NEAR(r, std::sqrt(sq / n), 1e-12);
    EXPECT_LE(m, r);
  }
}

TEST(SpectralMetrics, OneHotAlgebra) {
  std::vector<double> a{0, 0, 3, 0, 0}, b{0, 0, 0, 0, 7};
  EXPECT_NEAR(*smae_from_psd(a, b), 2.0 / 5.0, 1e-15);
  EXPECT_FALSE(smae_from_psd(std::vector<double>(5), b).has_value());
  FrequencyGrid grid({1.0, 2.0, 3.0, 4.0, 5.0});
  EXPECT_NEAR(std::abs(lead_frequency(a, grid) - lead_frequency(b, grid)), (5.0 - 3.0) / (2 * std::numbers::pi),
              1e-15);
  std::vector<double> tie{1, 4, 4, 2, 0};
  EXPECT_NEAR(lead_frequency(tie, grid), 2.0 / (2 * std::numbers::pi), 1e-15);
}

TEST(SpectralMetrics, IdenticalSeriesGiveZero) {
  auto c = random_case(3);
  auto grid = FrequencyGrid::linear(10, 0.1, 1.5);
  EXPECT_EQ(s_mae(c.truth, c.truth.values, grid).value, 0.0);
  EXPECT_EQ(lfe(c.truth, c.truth.values, grid).value, 0.0);
}

TEST(SpectralMetrics, ScalarOracle) {
  auto grid = FrequencyGrid::linear(12, 0.05, 1.5);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto c = random_case(seed);
    double smae_sum = 0, lfe_sum = 0;
    std::size_t smae_n = 0, lfe_n = 0;
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t k = 0; k < 2; ++k) {
        std::vector<double> t, xg, xp;
        for (std::size_t l = 0; l < 24; ++l)
          if (c.truth.obs_mask(b, k, l)) {
            t.push_back(c.truth.times(b)[l]);
            xg.push_back(c.truth.values(b, k, l));
            xp.push_back(c.pred(b, k, l));
          }
        if (t.size() < 2) continue;
        auto pg = scalar_psd(t, xg, grid), pp = scalar_psd(t, xp, grid);
        double sg = 0, sp = 0;
        for (std::size_t j = 0; j < pg.size(); ++j) {
          sg += pg[j];
          sp += pp[j];
        }
        std::size_t jg = 0, jp = 0;
        for (std::size_t j = 1; j < pg.size(); ++j) {
          if (pg[j] > pg[jg]) jg = j;
          if (pp[j] > pp[jp]) jp = j;
        }
        lfe_sum += std::abs(grid.frequency(jg) - grid.frequency(jp));
        ++lfe_n;
        if (sg <= 0 || sp <= 0) continue;
        double d = 0;
        for (std::size_t j = 0; j < pg.size(); ++j) d += std::abs(pg[j] / sg - pp[j] / sp);
        smae_sum += d / static_cast<double>(pg.size());
        ++smae_n;
      }
    auto s = s_mae(c.truth, c.pred, grid);
    auto f = lfe(c.truth, c.pred, grid);
    EXPECT_NEAR(s.value, smae_sum / smae_n, 1e-12);
    EXPECT_NEAR(f.value, lfe_sum / lfe_n, 1e-12);
    EXPECT_GE(s.value, 0.0);
    EXPECT_LE(s.value, 2.0);
  }
}

TEST(Metrics, IgnoreValuesOutsideMasks) {
  auto c = random_case(7);
  auto grid = FrequencyGrid::linear(10, 0.1, 1.5);
  auto base = evaluate(c.truth, c.pred, c.split, grid);
  auto truth = c.truth;
  truth.values = testing::poison(truth.values, truth.obs_mask);
  auto pred = testing::poison(c.pred, truth.obs_mask);
  auto poisoned = evaluate(truth, pred, c.split, grid);
  EXPECT_EQ(base.to_json(), poisoned.to_json());
}

TEST(Metrics, DegenerateRowsSkipped) {
  auto c = random_case(8);
  for (auto& m : c.truth.obs_mask.row(0, 0)) m = 0;
  c.truth.obs_mask(0, 0, 3) = 1;
  auto s = s_mae(c.truth, c.pred, FrequencyGrid::linear(8, 0.1, 1.0));
  EXPECT_EQ(s.skipped, 1u);
  EXPECT_EQ(s.evaluated, 5u);
}

}  // namespace
}  // namespace lscd::metrics
