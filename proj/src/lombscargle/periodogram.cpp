#include "lscd/lombscargle/periodogram.hpp"

#include <algorithm>
#include <cmath>

#include "lscd/core/error.hpp"

namespace lscd::ls {

namespace {

void check_inputs(const Shape3& s, std::span<const double> timestamps, const Mask& mask) {
  if (!(mask.shape() == s)) throw ShapeError("periodogram: mask shape differs from values");
  if (timestamps.size() != s.batch * s.steps) throw ShapeError("periodogram: timestamps must be [B, L]");
}

/// Masked-in points of one (sample, channel) row, in step order.
struct RowPoints {
  std::vector<std::size_t> step;
  std::vector<double> t;
  std::vector<double> x;

  void gather(std::span<const double> times, std::span<const std::uint8_t> m, std::span<const double> v,
              bool with_values) {
    step.clear();
    t.clear();
    x.clear();
    for (std::size_t l = 0; l < m.size(); ++l) {
      if (!m[l]) continue;
      step.push_back(l);
      t.push_back(times[l]);
      if (with_values) x.push_back(v[l]);
    }
  }
};

double tau_for(std::span<const double> t, double omega) {
  double s2 = 0.0, c2 = 0.0;
  for (double ti : t) {
    const double a = 2.0 * omega * ti;
    s2 += std::sin(a);
    c2 += std::cos(a);
  }
  return std::atan2(s2, c2) / (2.0 * std::max(omega, kDenominatorClamp));
}

/// Shifted basis cos/sin(omega (t_i - tau)) for one frequency.
void basis(std::span<const double> t, double omega, double tau, std::vector<double>& c, std::vector<double>& s) {
  c.resize(t.size());
  s.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double a = omega * (t[i] - tau);
    c[i] = std::cos(a);
    s[i] = std::sin(a);
  }
}

void center_in_place(std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double& v : x) v -= mean;
}

}  // namespace

Values compute_tau(std::span<const double> timestamps, const Mask& mask, const FrequencyGrid& grid,
                   std::vector<std::uint8_t>* empty) {
  const Shape3& s = mask.shape();
  check_inputs(s, timestamps, mask);
  const std::size_t J = grid.size();
  Values tau(Shape3{s.batch, s.channels, J});
  if (empty) empty->assign(s.batch * s.channels, 0);
  RowPoints pts;
  for (std::size_t b = 0; b < s.batch; ++b) {
    auto times = timestamps.subspan(b * s.steps, s.steps);
    for (std::size_t k = 0; k < s.channels; ++k) {
      pts.gather(times, mask.row(b, k), {}, false);
      if (pts.t.empty()) {
        if (empty) (*empty)[b * s.channels + k] = 1;
        continue;
      }
      for (std::size_t j = 0; j < J; ++j) tau(b, k, j) = tau_for(pts.t, grid.omega(j));
    }
  }
  return tau;
}

Periodogram periodogram(const Values& values, std::span<const double> timestamps, const Mask& mask,
                        const FrequencyGrid& grid, bool center) {
  const Shape3& s = values.shape();
  check_inputs(s, timestamps, mask);
  const std::size_t J = grid.size();
  Periodogram out{Values(Shape3{s.batch, s.channels, J}), Values(Shape3{s.batch, s.channels, J}), grid,
                  std::vector<std::uint8_t>(s.batch * s.channels, 0)};
  RowPoints pts;
  std::vector<double> c, sn;
  for (std::size_t b = 0; b < s.batch; ++b) {
    auto times = timestamps.subspan(b * s.steps, s.steps);
    for (std::size_t k = 0; k < s.channels; ++k) {
      pts.gather(times, mask.row(b, k), values.row(b, k), true);
      const std::size_t n = pts.t.size();
      if (n < 2) out.degenerate[b * s.channels + k] = 1;
      if (n == 0) continue;
      if (center) center_in_place(pts.x);
      for (std::size_t j = 0; j < J; ++j) {
        const double omega = grid.omega(j);
        const double tau = tau_for(pts.t, omega);
        out.tau(b, k, j) = tau;
        if (n < 2) continue;
        basis(pts.t, omega, tau, c, sn);
        double yc = 0.0, ys = 0.0, cc = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          yc += pts.x[i] * c[i];
          ys += pts.x[i] * sn[i];
          cc += c[i] * c[i];
          ss += sn[i] * sn[i];
        }
        cc = std::max(cc, kDenominatorClamp);
        ss = std::max(ss, kDenominatorClamp);
        out.power(b, k, j) = 0.5 * (yc * yc / cc + ys * ys / ss);
      }
    }
  }
  return out;
}

Periodogram periodogram(const TimeSeriesBatch& batch, const FrequencyGrid& grid, bool center) {
  return periodogram(batch.values, batch.timestamps, batch.obs_mask, grid, center);
}

Periodogram periodogram(const TimeSeriesBatch& batch, const ConditionalSplit& split, const FrequencyGrid& grid,
                        bool center) {
  return periodogram(batch.values, batch.timestamps, split.cond_mask, grid, center);
}

Values periodogram_vjp(const Values& values, std::span<const double> timestamps, const Mask& mask,
                       const FrequencyGrid& grid, bool center, const Values& upstream) {
  const Shape3& s = values.shape();
  check_inputs(s, timestamps, mask);
  const std::size_t J = grid.size();
  if (!(upstream.shape() == Shape3{s.batch, s.channels, J})) throw ShapeError("periodogram_vjp: upstream must be [B, K, J]");
  Values grad(s);
  RowPoints pts;
  std::vector<double> c, sn, g;
  for (std::size_t b = 0; b < s.batch; ++b) {
    auto times = timestamps.subspan(b * s.steps, s.steps);
    for (std::size_t k = 0; k < s.channels; ++k) {
      pts.gather(times, mask.row(b, k), values.row(b, k), true);
      const std::size_t n = pts.t.size();
      if (n < 2) continue;
      if (center) center_in_place(pts.x);
      g.assign(n, 0.0);
      for (std::size_t j = 0; j < J; ++j) {
        const double u = upstream(b, k, j);
        if (u == 0.0) continue;
        const double omega = grid.omega(j);
        basis(pts.t, omega, tau_for(pts.t, omega), c, sn);
        double yc = 0.0, ys = 0.0, cc = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          yc += pts.x[i] * c[i];
          ys += pts.x[i] * sn[i];
          cc += c[i] * c[i];
          ss += sn[i] * sn[i];
        }
        const double ac = u * yc / std::max(cc, kDenominatorClamp);
        const double as = u * ys / std::max(ss, kDenominatorClamp);
        for (std::size_t i = 0; i < n; ++i) g[i] += ac * c[i] + as * sn[i];
      }
      if (center) center_in_place(g);
      auto row = grad.row(b, k);
      for (std::size_t i = 0; i < n; ++i) row[pts.step[i]] = g[i];
    }
  }
  return grad;
}

}  // namespace lscd::ls
