#pragma once

#include "lscd/autodiff/tape.hpp"
#include "lscd/lombscargle/fap.hpp"

namespace lscd::ad {

/// Fixed (non-differentiated) inputs of the Lomb-Scargle feature node.
struct LsFeatureSpec {
  std::vector<double> timestamps;  // [B, L]
  Mask mask;                       // [B, K, L]
  FrequencyGrid grid;
  ls::FeatureOptions options;
  bool center = false;
};

/// Differentiable spectral feature: values [B, K, L] -> [B * K, J].
/// Backward chains the feature VJP into the periodogram VJP.
Var ls_feature(Var values, const LsFeatureSpec& spec);

}  // namespace lscd::ad
