#include "lscd/lombscargle/fap.hpp"

#include <cmath>

#include "lscd/core/error.hpp"

namespace lscd::ls {

double false_alarm_probability(double power, double j_eff) {
  if (!(j_eff >= 1.0)) throw ValueError("false_alarm_probability: j_eff must be >= 1");
  const double p = std::max(power, 0.0);
  // 1 - (1 - e^-P)^J  ==  -expm1(J * log1p(-e^-P))
  const double q = std::exp(-p);
  if (q >= 1.0) return 1.0;
  return std::clamp(-std::expm1(j_eff * std::log1p(-q)), 0.0, 1.0);
}

FapAnnotation false_alarm_probability(const Periodogram& p, double j_eff) {
  FapAnnotation out{Values(p.power.shape()), j_eff, Values(p.power.shape())};
  for (std::size_t i = 0; i < p.power.size(); ++i) {
    out.fap[i] = false_alarm_probability(p.power[i], j_eff);
    out.weights[i] = 1.0 / (out.fap[i] + kFapEpsilon);
  }
  return out;
}

FapFilter parse_fap_filter(const std::string& name) {
  if (name == "weight") return FapFilter::weight;
  if (name == "threshold") return FapFilter::threshold;
  if (name == "none") return FapFilter::none;
  throw ValueError("unknown FAP filter: " + name);
}

std::string to_string(FapFilter f) {
  switch (f) {
    case FapFilter::weight: return "weight";
    case FapFilter::threshold: return "threshold";
    case FapFilter::none: return "none";
  }
  return "weight";
}

nlohmann::json to_json(const FeatureOptions& o) {
  return {{"filter", to_string(o.filter)},
          {"order", o.weight_before_log ? "weight-then-log" : "log-then-weight"},
          {"j_eff", o.j_eff},
          {"threshold", o.threshold}};
}

FeatureOptions feature_options_from_json(const nlohmann::json& j) {
  FeatureOptions o;
  if (j.is_null()) return o;
  if (j.contains("filter")) o.filter = parse_fap_filter(j.at("filter").get<std::string>());
  if (j.contains("order")) {
    const auto order = j.at("order").get<std::string>();
    if (order != "weight-then-log" && order != "log-then-weight") throw ValueError("unknown feature order: " + order);
    o.weight_before_log = order == "weight-then-log";
  }
  o.j_eff = j.value("j_eff", o.j_eff);
  o.threshold = j.value("threshold", o.threshold);
  return o;
}

namespace {

/// d FAP / dP.
double fap_derivative(double p, double j_eff) {
  const double q = std::exp(-p);
  return -j_eff * std::pow(-std::expm1(-p), j_eff - 1.0) * q;
}

/// Unstandardized feature value and its derivative with respect to P.
std::pair<double, double> raw_feature(double power, double j_eff, const FeatureOptions& o) {
  const double p = std::max(power, 0.0);
  const double dp = power > 0.0 ? 1.0 : 0.0;
  switch (o.filter) {
    case FapFilter::none: return {std::log1p(p), dp / (1.0 + p)};
    case FapFilter::threshold: {
      if (false_alarm_probability(p, j_eff) > o.threshold) return {0.0, 0.0};
      return {std::log1p(p), dp / (1.0 + p)};
    }
    case FapFilter::weight: break;
  }
  const double fap = false_alarm_probability(p, j_eff);
  const double w = 1.0 / (fap + kFapEpsilon);
  const double dw = -fap_derivative(p, j_eff) * w * w;
  if (o.weight_before_log) {
    const double wp = w * p;
    return {std::log1p(wp), dp * (w + p * dw) / (1.0 + wp)};
  }
  const double lp = std::log1p(p);
  return {w * lp, dp * (dw * lp + w / (1.0 + p))};
}

constexpr double kMinSpread = 1e-12;

}  // namespace

Values spectral_feature(const Values& power, const FeatureOptions& opts) {
  const Shape3& s = power.shape();
  const double j_eff = opts.resolve_j_eff(s.steps);
  Values out(s);
  std::vector<double> g(s.steps);
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t k = 0; k < s.channels; ++k) {
      auto row = power.row(b, k);
      double mean = 0.0;
      for (std::size_t j = 0; j < s.steps; ++j) {
        g[j] = raw_feature(row[j], j_eff, opts).first;
        mean += g[j];
      }
      mean /= static_cast<double>(s.steps);
      double var = 0.0;
      for (double v : g) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(s.steps));
      if (!(sd > kMinSpread)) continue;
      auto dst = out.row(b, k);
      for (std::size_t j = 0; j < s.steps; ++j) dst[j] = (g[j] - mean) / sd;
    }
  return out;
}

Values spectral_feature(const Periodogram& p, const FapAnnotation& fap, const FeatureOptions& opts) {
  if (!(fap.fap.shape() == p.power.shape())) throw ShapeError("spectral_feature: FAP shape differs from power");
  FeatureOptions o = opts;
  o.j_eff = fap.j_eff;
  return spectral_feature(p.power, o);
}

Values spectral_feature_vjp(const Values& power, const FeatureOptions& opts, const Values& upstream) {
  const Shape3& s = power.shape();
  if (!(upstream.shape() == s)) throw ShapeError("spectral_feature_vjp: upstream shape differs from power");
  const double j_eff = opts.resolve_j_eff(s.steps);
  const double n = static_cast<double>(s.steps);
  Values grad(s);
  std::vector<double> g(s.steps), dg(s.steps), y(s.steps);
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t k = 0; k < s.channels; ++k) {
      auto row = power.row(b, k);
      double mean = 0.0;
      for (std::size_t j = 0; j < s.steps; ++j) {
        std::tie(g[j], dg[j]) = raw_feature(row[j], j_eff, opts);
        mean += g[j];
      }
      mean /= n;
      double var = 0.0;
      for (double v : g) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / n);
      if (!(sd > kMinSpread)) continue;
      auto up = upstream.row(b, k);
      double mean_up = 0.0, mean_up_y = 0.0;
      for (std::size_t j = 0; j < s.steps; ++j) {
        y[j] = (g[j] - mean) / sd;
        mean_up += up[j];
        mean_up_y += up[j] * y[j];
      }
      mean_up /= n;
      mean_up_y /= n;
      auto dst = grad.row(b, k);
      for (std::size_t j = 0; j < s.steps; ++j) dst[j] = (up[j] - mean_up - y[j] * mean_up_y) / sd * dg[j];
    }
  return grad;
}

}  // namespace lscd::ls
