#pragma once

#include <string>

#include "lscd/lombscargle/periodogram.hpp"

namespace lscd::ls {

/// Additive constant in the FAP weight 1 / (FAP + eps).
inline constexpr double kFapEpsilon = 1e-10;

struct FapAnnotation {
  Values fap;      // [B, K, J], in [0, 1]
  double j_eff = 1.0;
  Values weights;  // [B, K, J], 1 / (fap + eps)
};

/// FAP(w) = 1 - (1 - exp(-P(w)))^j_eff, evaluated with log1p/expm1 so tiny
/// probabilities keep their relative precision.
double false_alarm_probability(double power, double j_eff);
FapAnnotation false_alarm_probability(const Periodogram& p, double j_eff);

/// How the FAP is used to filter the spectrum before the log transform.
enum class FapFilter {
  weight,     ///< multiply by w = 1 / (FAP + eps)
  threshold,  ///< zero the power where FAP > threshold
  none,
};

struct FeatureOptions {
  FapFilter filter = FapFilter::weight;
  /// true: log(1 + w P). false: w log(1 + P).
  bool weight_before_log = true;
  /// Effective number of independent frequencies; <= 0 means "use J".
  double j_eff = 0.0;
  double threshold = 0.01;

  double resolve_j_eff(std::size_t grid_size) const { return j_eff > 0 ? j_eff : static_cast<double>(grid_size); }
};

FapFilter parse_fap_filter(const std::string& name);
std::string to_string(FapFilter f);
nlohmann::json to_json(const FeatureOptions& o);
FeatureOptions feature_options_from_json(const nlohmann::json& j);

/// Conditioning feature: FAP-filtered, log-transformed power standardized to
/// zero mean and unit variance over the grid for each (sample, channel).
/// Rows with zero spread map to all-zero features.
Values spectral_feature(const Periodogram& p, const FapAnnotation& fap, const FeatureOptions& opts = {});

/// Same feature computed straight from a power array (FAP derived internally).
Values spectral_feature(const Values& power, const FeatureOptions& opts = {});

/// Gradient of <upstream, spectral_feature(power)> with respect to `power`,
/// differentiating through the FAP weights as well.
Values spectral_feature_vjp(const Values& power, const FeatureOptions& opts, const Values& upstream);

}  // namespace lscd::ls
