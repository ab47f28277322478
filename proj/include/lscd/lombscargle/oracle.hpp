#pragma once

#include <span>

namespace lscd::ls {

/// Least-squares sinusoid fit x ~ a1 cos(2 pi f t) + a2 sin(2 pi f t).
struct SinusoidFit {
  double alpha_cos = 0.0;
  double alpha_sin = 0.0;
  double amplitude = 0.0;
  /// Half the regression sum of squares; equals the Lomb-Scargle power.
  double power = 0.0;
  double residual_norm = 0.0;
};

/// Solves the 2x2 normal equations directly (pseudo-inverse below 1e-12
/// relative eigenvalue). Independent of the periodogram code path.
SinusoidFit ls_oracle(std::span<const double> t, std::span<const double> x, double f, bool center = false);

}  // namespace lscd::ls
