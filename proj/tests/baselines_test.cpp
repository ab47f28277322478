#include <gtest/gtest.h>

#include <cmath>

#include "lscd/baselines/baselines.hpp"
#include "lscd/core/split.hpp"
#include "test_util.hpp"

namespace lscd::baselines {
namespace {

TimeSeriesBatch row_batch(const std::vector<double>& t, const std::vector<double>& x) {
  return TimeSeriesBatch(Values(Shape3{1, 1, t.size()}, x), t, Mask(Shape3{1, 1, t.size()}, 1));
}

TEST(Baselines, ConstantAndSinglePoint) {
  auto batch = row_batch({0, 1, 2, 3}, {4, 4, 4, 4});
  Mask cond(batch.shape(), 0);
  cond[0] = cond[2] = 1;
  auto split = split_from_masks(batch.obs_mask, cond);
  const auto m4 = impute_mean(batch, split), l4 = impute_lerp(batch, split);
  for (auto v : m4.data()) EXPECT_EQ(v, 4.0);
  for (auto v : l4.data()) EXPECT_EQ(v, 4.0);

  auto single = row_batch({0, 1, 2, 3}, {1, 7, 2, 3});
  Mask one(single.shape(), 0);
  one[1] = 1;
  auto s1 = split_from_masks(single.obs_mask, one);
  const auto m7 = impute_mean(single, s1), l7 = impute_lerp(single, s1);
  for (auto v : m7.data()) EXPECT_EQ(v, 7.0);
  for (auto v : l7.data()) EXPECT_EQ(v, 7.0);
}

TEST(Baselines, LerpMidpointAndExtension) {
  std::vector<double> t{-2, 0, 5, 10, 12};
  auto batch = row_batch(t, {99, 0, 99, 10, 99});
  Mask cond(batch.shape(), 0);
  cond[1] = cond[3] = 1;
  auto split = split_from_masks(batch.obs_mask, cond);
  auto out = impute_lerp(batch, split);
  EXPECT_DOUBLE_EQ(out[2], 5.0);
  EXPECT_DOUBLE_EQ(out[0], 0.0);
  EXPECT_DOUBLE_EQ(out[4], 10.0);
}

TEST(Baselines, EmptyChannelFallsBackToBatchMean) {
  auto batch = testing::random_batch({3, 2, 10}, 4, 1.0);
  Mask cond = batch.obs_mask;
  for (auto& m : cond.row(1, 0)) m = 0;
  for (std::size_t b = 0; b < 3; ++b)
    for (auto& m : cond.row(b, 1)) m = 0;
  auto split = split_from_masks(batch.obs_mask, cond);
  double s = 0;
  for (std::size_t b : {0u, 2u})
    for (double v : batch.values.row(b, 0)) s += v;
  const double batch_mean = s / 20.0;
  for (const auto& out : {impute_mean(batch, split), impute_lerp(batch, split)}) {
    for (double v : out.row(1, 0)) EXPECT_NEAR(v, batch_mean, 1e-12);
    for (std::size_t b = 0; b < 3; ++b)
      for (double v : out.row(b, 1)) EXPECT_EQ(v, 0.0);
  }
}

TEST(Baselines, ScalarOracleAndConditionCopy) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto batch = testing::random_batch({3, 3, 20}, seed, 0.9);
    Rng rng(seed);
    auto split = make_conditional_split(batch, SplitStrategy::uniform_random, 0.4, rng);
    auto mean_out = impute_mean(batch, split);
    auto lerp_out = impute_lerp(batch, split);
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t k = 0; k < 3; ++k) {
        std::vector<double> ct, cx;
        for (std::size_t l = 0; l < 20; ++l)
          if (split.cond_mask(b, k, l)) {
            ct.push_back(batch.times(b)[l]);
            cx.push_back(batch.values(b, k, l));
          }
        if (ct.size() < 2) continue;
        double m = 0;
        for (double v : cx) m += v;
        m /= static_cast<double>(cx.size());
        for (std::size_t l = 0; l < 20; ++l) {
          if (split.cond_mask(b, k, l)) {
            EXPECT_EQ(mean_out(b, k, l), batch.values(b, k, l));
            EXPECT_EQ(lerp_out(b, k, l), batch.values(b, k, l));
            continue;
          }
          EXPECT_NEAR(mean_out(b, k, l), m, 1e-12);
          const double t = batch.times(b)[l];
          double expect;
          if (t <= ct.front()) {
            expect = cx.front();
          } else if (t >= ct.back()) {
            expect = cx.back();
          } else {
            std::size_t i = 0;
            while (ct[i + 1] < t) ++i;
            expect = cx[i] + (cx[i + 1] - cx[i]) * (t - ct[i]) / (ct[i + 1] - ct[i]);
          }
          EXPECT_NEAR(lerp_out(b, k, l), expect, 1e-12);
        }
      }
  }
}

TEST(Baselines, LerpExactOnLinearSignal) {
  auto batch = testing::random_batch({2, 2, 30}, 6, 1.0);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t l = 0; l < 30; ++l) batch.values(b, k, l) = 1.5 * batch.times(b)[l] - 2.0 + k;
  Mask cond(batch.shape(), 0);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t k = 0; k < 2; ++k) {
      cond(b, k, 0) = cond(b, k, 29) = cond(b, k, 13) = 1;
    }
  auto out = impute_lerp(batch, split_from_masks(batch.obs_mask, cond));
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], batch.values[i], 1e-12);
}

TEST(Baselines, IgnoreNonConditionValues) {
  auto batch = testing::random_batch({3, 2, 15}, 8);
  Rng rng(1);
  auto split = make_conditional_split(batch, SplitStrategy::uniform_random, 0.5, rng);
  auto poisoned = batch;
  poisoned.values = testing::poison(batch.values, split.cond_mask);
  EXPECT_EQ(impute_mean(batch, split), impute_mean(poisoned, split));
  EXPECT_EQ(impute_lerp(batch, split), impute_lerp(poisoned, split));
}

}  // namespace
}  // namespace lscd::baselines
