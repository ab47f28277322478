#include "lscd/synth/sines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lscd/core/error.hpp"
#include "lscd/core/random.hpp"

namespace lscd::synth {

void SineChannelSpec::validate() const {
  const std::size_t n = mean_freqs.size();
  if (n == 0) throw ValueError("SineChannelSpec: need at least one component");
  if (widths.size() != n || amplitudes.size() != n)
    throw ValueError("SineChannelSpec: mean_freqs, widths and amplitudes must have equal length");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(widths[i] > 0.0)) throw ValueError("SineChannelSpec: widths must be > 0");
    if (!(mean_freqs[i] - widths[i] / 2.0 >= 0.0)) throw ValueError("SineChannelSpec: mean - width/2 must be >= 0");
    if (!std::isfinite(amplitudes[i])) throw ValueError("SineChannelSpec: amplitudes must be finite");
  }
  if (!(noise_sigma >= 0.0)) throw ValueError("SineChannelSpec: noise_sigma must be >= 0");
}

std::vector<SineChannelSpec> reference_channels(double noise_sigma) {
  return {
      {{1.0}, {1.0}, {1.0}, noise_sigma},
      {{1.0, 2.0}, {1.0, 1.5}, {0.5, 1.0}, noise_sigma},
      {{1.0, 2.0, 3.0}, {1.0, 1.0, 1.5}, {0.5, 1.0, 1.5}, noise_sigma},
      {{0.5, 1.0, 1.5, 2.0}, {1.0, 1.0, 1.0, 2.0}, {0.8, 1.2, 1.5, 2.0}, noise_sigma},
      {{0.5, 1.0, 2.0, 3.0, 4.0}, {0.5, 1.0, 1.0, 1.5, 2.0}, {1.0, 1.5, 2.0, 2.5, 3.0}, noise_sigma},
  };
}

nlohmann::json SinesConfig::to_json() const {
  nlohmann::json ch = nlohmann::json::array();
  for (const auto& c : channels)
    ch.push_back({{"mean_freqs", c.mean_freqs},
                  {"widths", c.widths},
                  {"amplitudes", c.amplitudes},
                  {"noise_sigma", c.noise_sigma}});
  return {{"n_samples", n_samples}, {"length", length}, {"horizon", horizon},
          {"channels", ch},         {"seed", seed},     {"jitter", jitter}};
}

SinesConfig SinesConfig::from_json(const nlohmann::json& j) {
  SinesConfig c;
  c.n_samples = j.value("n_samples", c.n_samples);
  c.length = j.value("length", c.length);
  c.horizon = j.value("horizon", c.horizon);
  c.seed = j.value("seed", c.seed);
  c.jitter = j.value("jitter", c.jitter);
  const double sigma = j.value("noise_sigma", 0.1);
  if (j.contains("channels") && j.at("channels").is_array()) {
    c.channels.clear();
    for (const auto& cj : j.at("channels"))
      c.channels.push_back({cj.at("mean_freqs").get<std::vector<double>>(), cj.at("widths").get<std::vector<double>>(),
                            cj.at("amplitudes").get<std::vector<double>>(), cj.value("noise_sigma", sigma)});
  } else {
    c.channels = reference_channels(sigma);
    const std::size_t k = j.value("n_channels", c.channels.size());
    if (k < 1 || k > c.channels.size()) throw ValueError("SinesConfig: n_channels must be in [1, 5]");
    c.channels.resize(k);
  }
  return c;
}

namespace {

double beta_draw(Rng& rng, double a, double b) {
  const double x = std::gamma_distribution<double>(a, 1.0)(rng);
  const double y = std::gamma_distribution<double>(b, 1.0)(rng);
  return x / (x + y);
}

}  // namespace

SinesDataset generate_sines(const SinesConfig& config) {
  if (config.n_samples == 0 || config.length < 2) throw ValueError("generate_sines: need n_samples >= 1 and length >= 2");
  if (!(config.horizon > 0.0)) throw ValueError("generate_sines: horizon must be > 0");
  if (!(config.jitter >= 0.0 && config.jitter < 1.0)) throw ValueError("generate_sines: jitter must be in [0, 1)");
  if (config.channels.empty()) throw ValueError("generate_sines: no channels");
  for (const auto& c : config.channels) c.validate();

  const std::size_t B = config.n_samples, K = config.channels.size(), L = config.length;
  const Shape3 shape{B, K, L};
  Values values(shape);
  std::vector<double> times(B * L);
  SinesDataset ds;
  ds.frequencies.assign(B, std::vector<std::vector<double>>(K));
  const double dt = config.horizon / static_cast<double>(L - 1);

  for (std::size_t b = 0; b < B; ++b) {
    Rng rng(derive_seed(config.seed, b));
    for (std::size_t l = 0; l < L; ++l) {
      double t = dt * static_cast<double>(l);
      if (config.jitter > 0.0 && l > 0 && l + 1 < L) t += (uniform01(rng) - 0.5) * config.jitter * dt;
      times[b * L + l] = t;
    }
    for (std::size_t k = 0; k < K; ++k) {
      const auto& ch = config.channels[k];
      auto row = values.row(b, k);
      for (std::size_t i = 0; i < ch.n_components(); ++i) {
        const double f = beta_draw(rng, 2.0, 2.0) * ch.widths[i] + (ch.mean_freqs[i] - ch.widths[i] / 2.0);
        const double phase = 2.0 * std::numbers::pi * uniform01(rng);
        ds.frequencies[b][k].push_back(f);
        ds.phases.push_back(phase);
        for (std::size_t l = 0; l < L; ++l)
          row[l] += ch.amplitudes[i] * std::sin(2.0 * std::numbers::pi * f * times[b * L + l] + phase);
      }
      if (ch.noise_sigma > 0.0)
        for (double& v : row) v += ch.noise_sigma * standard_normal(rng);
    }
  }
  ds.batch = TimeSeriesBatch(std::move(values), std::move(times), Mask(shape, 1));
  ds.batch.meta["generator"] = "sines";
  ds.batch.meta["config"] = config.to_json();
  return ds;
}

double SinesDataset::dominant_frequency(std::size_t sample, std::size_t channel) const {
  const auto& f = frequencies.at(sample).at(channel);
  const auto& amps = batch.meta.at("config").at("channels").at(channel).at("amplitudes");
  std::size_t best = 0;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (amps.at(i).get<double>() > amps.at(best).get<double>()) best = i;
  return f[best];
}

nlohmann::json SinesDataset::ground_truth_json() const {
  nlohmann::json dom = nlohmann::json::array();
  for (std::size_t b = 0; b < frequencies.size(); ++b) {
    std::vector<double> row;
    for (std::size_t k = 0; k < frequencies[b].size(); ++k) row.push_back(dominant_frequency(b, k));
    dom.push_back(row);
  }
  return {{"frequencies", frequencies}, {"dominant", dom}, {"phases", phases}};
}

}  // namespace lscd::synth
