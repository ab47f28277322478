#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lscd/lombscargle/fft_psd.hpp"
#include "lscd/lombscargle/periodogram.hpp"
#include "lscd/synth/sines.hpp"

namespace lscd::synth {
namespace {

TEST(Sines, ReferenceTableFirstRow) {
  auto ch = reference_channels();
  ASSERT_EQ(ch.size(), 5u);
  EXPECT_EQ(ch[0].mean_freqs, std::vector<double>{1.0});
  EXPECT_EQ(ch[0].widths, std::vector<double>{1.0});
  EXPECT_EQ(ch[0].amplitudes, std::vector<double>{1.0});
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(ch[k].n_components(), k + 1);
}

TEST(Sines, NoiselessSingleComponent) {
  SinesConfig cfg;
  cfg.n_samples = 3;
  cfg.channels = {SineChannelSpec{{2.0}, {0.5}, {1.5}, 0.0}};
  auto d = generate_sines(cfg);
  for (std::size_t b = 0; b < 3; ++b) {
    const double f = d.frequencies[b][0][0];
    const double phi = d.phases[b];
    auto t = d.batch.times(b);
    for (std::size_t l = 0; l < cfg.length; ++l)
      EXPECT_NEAR(d.batch.values(b, 0, l), 1.5 * std::sin(2 * std::numbers::pi * f * t[l] + phi), 1e-12);
  }
}

TEST(Sines, FrequenciesWithinSupportAndCentered) {
  SinesConfig cfg;
  cfg.n_samples = 10000;
  cfg.length = 4;
  cfg.channels = {SineChannelSpec{{1.0}, {1.0}, {1.0}, 0.1}};
  cfg.seed = 5;
  auto d = generate_sines(cfg);
  double mean = 0.0;
  for (const auto& s : d.frequencies) {
    EXPECT_GE(s[0][0], 0.5);
    EXPECT_LE(s[0][0], 1.5);
    mean += s[0][0];
  }
  EXPECT_NEAR(mean / 10000.0, 1.0, 0.01);
}

TEST(Sines, SeedDeterminismAndShape) {
  SinesConfig cfg;
  cfg.n_samples = 20;
  cfg.seed = 9;
  auto a = generate_sines(cfg);
  auto b = generate_sines(cfg);
  EXPECT_EQ(a.batch.values, b.batch.values);
  EXPECT_EQ(a.batch.shape(), (Shape3{20, 5, 100}));
  EXPECT_DOUBLE_EQ(a.batch.timestamps[99], 10.0);
  cfg.seed = 10;
  EXPECT_NE(generate_sines(cfg).batch.values, a.batch.values);
  // Sample b depends only on (seed, b).
  cfg.seed = 9;
  cfg.n_samples = 5;
  auto c = generate_sines(cfg);
  for (std::size_t i = 0; i < c.batch.values.size(); ++i) EXPECT_EQ(c.batch.values[i], a.batch.values[i]);
}

TEST(Sines, PeriodogramFindsChannelOneFrequency) {
  SinesConfig cfg;
  cfg.n_samples = 400;
  cfg.seed = 12;
  auto d = generate_sines(cfg);
  auto grid = FrequencyGrid::default_for(d.batch);
  auto p = ls::periodogram(d.batch, grid, true);
  const double bin = grid.frequency(1) - grid.frequency(0);
  std::size_t hits = 0;
  for (std::size_t b = 0; b < cfg.n_samples; ++b) {
    const auto j = ls::argmax(p.power.row(b, 0).subspan(0, grid.size()));
    if (std::abs(grid.frequency(j) - d.dominant_frequency(b, 0)) <= bin) ++hits;
  }
  EXPECT_GE(static_cast<double>(hits), 0.95 * static_cast<double>(cfg.n_samples));
}

TEST(Sines, ValidationRejectsBadSpecs) {
  SineChannelSpec bad{{0.2}, {1.0}, {1.0}, 0.1};  // mu - w/2 < 0
  EXPECT_THROW(bad.validate(), ValueError);
  SineChannelSpec mismatched{{1.0, 2.0}, {1.0}, {1.0}, 0.1};
  EXPECT_THROW(mismatched.validate(), ValueError);
}

TEST(Sines, ConfigJsonRoundTrip) {
  SinesConfig cfg;
  cfg.seed = 77;
  cfg.jitter = 0.2;
  EXPECT_EQ(SinesConfig::from_json(cfg.to_json()).to_json(), cfg.to_json());
}

}  // namespace
}  // namespace lscd::synth
