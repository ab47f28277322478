#pragma once

#include <complex>
#include <string>
#include <vector>

#include "lscd/core/types.hpp"

namespace lscd::ls {

enum class FillStrategy { linear_interp, zero };

FillStrategy parse_fill(const std::string& name);

struct FftSpectrum {
  Values power;                    // [B, K, N/2 + 1], |X_m|^2 / N
  std::vector<double> frequencies;  // cycles per time unit, m / (N dt)
};

/// Discrete Fourier transform. Radix-2 for power-of-two lengths, direct otherwise.
std::vector<std::complex<double>> dft(std::span<const double> x);

/// Resample every row onto the uniform grid t0 + n * dt (dt = median spacing),
/// filling unobserved points per `fill`. Linear interpolation extends the
/// nearest observed value past the ends; rows with no observation become 0.
Values fill_uniform(const TimeSeriesBatch& batch, FillStrategy fill, double* dt_out = nullptr);

/// Fill missing entries then take the periodogram |X_m|^2 / N, m = 0..N/2.
FftSpectrum fft_psd_with_fill(const TimeSeriesBatch& batch, FillStrategy fill);

/// Index of the largest value; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> row, std::size_t first = 0);

}  // namespace lscd::ls
