#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include <fftw3.h>

#include "gridfault/core/error.hpp"

namespace gridfault::wavefeat {

struct SpectralLine {
  double frequency = 0.0;  // hertz
  double amplitude = 0.0;  // peak amplitude of the sinusoid
};

/// Magnitudes of the one-sided Hann-windowed spectrum, scaled so that an
/// on-bin sinusoid of peak amplitude A reads A.
inline std::vector<double> hann_amplitude_spectrum(std::span<const double> x) {
  const std::size_t n = x.size();
  require(n >= 4, "spectrum: need at least 4 samples");
  std::vector<double> in(n);
  double window_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    in[i] = x[i] * w;
    window_sum += w;
  }
  const std::size_t bins = n / 2 + 1;
  std::unique_ptr<fftw_complex[], decltype(&fftw_free)> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)), &fftw_free);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out.get(), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  std::vector<double> mag(bins);
  for (std::size_t k = 0; k < bins; ++k)
    mag[k] = 2.0 * std::hypot(out[k][0], out[k][1]) / window_sum;
  return mag;
}

/// Largest spectral line in [f_lo, f_hi], refined by parabolic
/// interpolation across the neighbouring bins.
inline SpectralLine spectral_peak(std::span<const double> x, double fs, double f_lo, double f_hi) {
  const auto mag = hann_amplitude_spectrum(x);
  const double df = fs / static_cast<double>(x.size());
  std::size_t lo = static_cast<std::size_t>(std::max(1.0, std::ceil(f_lo / df)));
  std::size_t hi = std::min(mag.size() - 2, static_cast<std::size_t>(std::floor(f_hi / df)));
  require(lo <= hi, "spectrum: frequency window contains no bins");
  std::size_t best = lo;
  for (std::size_t k = lo; k <= hi; ++k)
    if (mag[k] > mag[best]) best = k;
  const double a = mag[best - 1], b = mag[best], c = mag[best + 1];
  double offset = 0.0, peak = b;
  const double denom = a - 2.0 * b + c;
  if (denom < 0.0) {
    offset = 0.5 * (a - c) / denom;
    offset = std::clamp(offset, -0.5, 0.5);
    peak = b - 0.25 * (a - c) * offset;
  }
  return {(static_cast<double>(best) + offset) * df, peak};
}

}  // namespace gridfault::wavefeat
