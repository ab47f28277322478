#include "lscd/lombscargle/oracle.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "lscd/core/error.hpp"

namespace lscd::ls {

SinusoidFit ls_oracle(std::span<const double> t, std::span<const double> x, double f, bool center) {
  if (t.size() != x.size()) throw ValueError("ls_oracle: t and x differ in length");
  if (t.size() < 2) throw ValueError("ls_oracle: need at least two points");
  const std::size_t n = t.size();
  std::vector<double> y(x.begin(), x.end());
  if (center) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    for (double& v : y) v -= mean;
  }
  // H = [cos(2 pi f t), sin(2 pi f t)]; normal equations (H^T H) theta = H^T y.
  double a = 0.0, bb = 0.0, d = 0.0, hc = 0.0, hs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(2.0 * std::numbers::pi * f * t[i]);
    const double s = std::sin(2.0 * std::numbers::pi * f * t[i]);
    a += c * c;
    bb += c * s;
    d += s * s;
    hc += c * y[i];
    hs += s * y[i];
  }
  // Symmetric 2x2 pseudo-inverse through its eigen-decomposition.
  const double tr = a + d;
  const double disc = std::sqrt(0.25 * (a - d) * (a - d) + bb * bb);
  const double l1 = 0.5 * tr + disc;
  const double l2 = 0.5 * tr - disc;
  double v1x, v1y;
  if (std::abs(bb) > 0.0) {
    v1x = l1 - d;
    v1y = bb;
  } else if (a >= d) {
    v1x = 1.0;
    v1y = 0.0;
  } else {
    v1x = 0.0;
    v1y = 1.0;
  }
  const double norm = std::hypot(v1x, v1y);
  v1x /= norm;
  v1y /= norm;
  const double v2x = -v1y, v2y = v1x;
  const double tol = 1e-12 * std::max(std::abs(l1), 1e-300);
  const double inv1 = std::abs(l1) > tol ? 1.0 / l1 : 0.0;
  const double inv2 = std::abs(l2) > tol ? 1.0 / l2 : 0.0;
  const double p1 = v1x * hc + v1y * hs;
  const double p2 = v2x * hc + v2y * hs;

  SinusoidFit fit;
  fit.alpha_cos = inv1 * p1 * v1x + inv2 * p2 * v2x;
  fit.alpha_sin = inv1 * p1 * v1y + inv2 * p2 * v2y;
  fit.amplitude = std::hypot(fit.alpha_cos, fit.alpha_sin);
  fit.power = 0.5 * (fit.alpha_cos * hc + fit.alpha_sin * hs);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.alpha_cos * std::cos(2.0 * std::numbers::pi * f * t[i]) -
                     fit.alpha_sin * std::sin(2.0 * std::numbers::pi * f * t[i]);
    rss += r * r;
  }
  fit.residual_norm = std::sqrt(rss);
  return fit;
}

}  // namespace lscd::ls
