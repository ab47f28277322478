#include "lscd/lombscargle/fft_psd.hpp"

#include <cmath>
#include <numbers>

#include "lscd/core/error.hpp"

namespace lscd::ls {

FillStrategy parse_fill(const std::string& name) {
  if (name == "linear-interp" || name == "lerp") return FillStrategy::linear_interp;
  if (name == "zero") return FillStrategy::zero;
  throw ValueError("unknown fill strategy: " + name);
}

namespace {

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> w = std::polar(1.0, ang * static_cast<double>(j));
        const auto u = a[i + j];
        const auto v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
      }
    }
  }
}

}  // namespace

std::vector<std::complex<double>> dft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  if (is_pow2(n)) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i];
    fft_radix2(out);
    return out;
  }
  for (std::size_t m = 0; m < n; ++m) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // (m * i) mod n keeps the twiddle argument small.
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((m * i) % n) / static_cast<double>(n);
      acc += x[i] * std::polar(1.0, ang);
    }
    out[m] = acc;
  }
  return out;
}

Values fill_uniform(const TimeSeriesBatch& batch, FillStrategy fill, double* dt_out) {
  const Shape3& s = batch.shape();
  const double dt = median_spacing(batch);
  if (dt_out) *dt_out = dt;
  Values out(s);
  std::vector<double> ot, ov;
  for (std::size_t b = 0; b < s.batch; ++b) {
    auto times = batch.times(b);
    const double t0 = times[0];
    for (std::size_t k = 0; k < s.channels; ++k) {
      ot.clear();
      ov.clear();
      for (std::size_t l = 0; l < s.steps; ++l)
        if (batch.obs_mask(b, k, l)) {
          ot.push_back(times[l]);
          ov.push_back(batch.values(b, k, l));
        }
      auto dst = out.row(b, k);
      if (ot.empty()) continue;
      std::size_t seg = 0;
      for (std::size_t n = 0; n < s.steps; ++n) {
        const double tg = t0 + dt * static_cast<double>(n);
        if (fill == FillStrategy::zero) {
          // Nearest original step to the grid point, if it is observed.
          const bool uniform = std::abs(times[n] - tg) <= 1e-9 * std::max(1.0, std::abs(tg));
          dst[n] = uniform && batch.obs_mask(b, k, n) ? batch.values(b, k, n) : 0.0;
          continue;
        }
        if (tg <= ot.front()) {
          dst[n] = ov.front();
        } else if (tg >= ot.back()) {
          dst[n] = ov.back();
        } else {
          while (seg + 1 < ot.size() && ot[seg + 1] < tg) ++seg;
          const double w = (tg - ot[seg]) / (ot[seg + 1] - ot[seg]);
          dst[n] = ov[seg] + w * (ov[seg + 1] - ov[seg]);
        }
      }
    }
  }
  return out;
}

FftSpectrum fft_psd_with_fill(const TimeSeriesBatch& batch, FillStrategy fill) {
  const Shape3& s = batch.shape();
  if (s.steps < 2) throw ValueError("fft_psd_with_fill: need at least two steps");
  double dt = 0.0;
  const Values filled = fill_uniform(batch, fill, &dt);
  const std::size_t n_bins = s.steps / 2 + 1;
  FftSpectrum out{Values(Shape3{s.batch, s.channels, n_bins}), std::vector<double>(n_bins)};
  for (std::size_t m = 0; m < n_bins; ++m)
    out.frequencies[m] = static_cast<double>(m) / (static_cast<double>(s.steps) * dt);
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t k = 0; k < s.channels; ++k) {
      const auto spec = dft(filled.row(b, k));
      auto dst = out.power.row(b, k);
      for (std::size_t m = 0; m < n_bins; ++m) dst[m] = std::norm(spec[m]) / static_cast<double>(s.steps);
    }
  return out;
}

std::size_t argmax(std::span<const double> row, std::size_t first) {
  if (first >= row.size()) throw ValueError("argmax: empty range");
  std::size_t best = first;
  for (std::size_t j = first + 1; j < row.size(); ++j)
    if (row[j] > row[best]) best = j;
  return best;
}

}  // namespace lscd::ls
