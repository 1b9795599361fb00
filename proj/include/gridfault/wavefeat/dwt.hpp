#pragma once

// Orthogonal multi-level discrete wavelet transform with periodic
// extension. Inputs whose length is not a multiple of 2^levels are
// zero-padded to the next multiple; the inverse trims the padding.

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gridfault/core/error.hpp"

namespace gridfault::wavefeat {

/// Daubechies wavelet with four vanishing moments (8 taps), decomposition
/// low-pass filter.
inline constexpr std::array<double, 8> kDb4Lowpass = {
    -0.010597401784997278, 0.032883011666982945, 0.030841381835986965, -0.18703481171888114,
    -0.02798376941698385,  0.6308807679295904,   0.7148465705525415,   0.23037781330885523};

inline constexpr const char* kDb4Id = "db4";

struct DecompositionResult {
  std::vector<double> approx;                // coarsest approximation band
  std::vector<std::vector<double>> details;  // details[0] is level 1 (finest)
  int levels = 0;
  std::string wavelet_id = kDb4Id;
  std::size_t original_length = 0;
  std::size_t padded_length = 0;
};

namespace detail {

inline std::array<double, 8> db4_highpass() {
  std::array<double, 8> g{};
  const std::size_t L = kDb4Lowpass.size();
  for (std::size_t n = 0; n < L; ++n)
    g[n] = ((n % 2) ? -1.0 : 1.0) * kDb4Lowpass[L - 1 - n];
  return g;
}

inline void analysis_step(std::span<const double> x, std::vector<double>& a, std::vector<double>& d) {
  static const auto g = db4_highpass();
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  a.assign(half, 0.0);
  d.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double sa = 0.0, sd = 0.0;
    for (std::size_t t = 0; t < kDb4Lowpass.size(); ++t) {
      const double v = x[(2 * k + t) % n];
      sa += kDb4Lowpass[t] * v;
      sd += g[t] * v;
    }
    a[k] = sa;
    d[k] = sd;
  }
}

inline std::vector<double> synthesis_step(std::span<const double> a, std::span<const double> d) {
  static const auto g = db4_highpass();
  const std::size_t half = a.size();
  const std::size_t n = 2 * half;
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < half; ++k)
    for (std::size_t t = 0; t < kDb4Lowpass.size(); ++t)
      x[(2 * k + t) % n] += kDb4Lowpass[t] * a[k] + g[t] * d[k];
  return x;
}

}  // namespace detail

inline DecompositionResult dwt(std::span<const double> signal, int levels) {
  require(levels >= 1, "dwt: levels must be >= 1");
  const std::size_t block = std::size_t{1} << levels;
  require(signal.size() >= block,
          "dwt: signal of length " + std::to_string(signal.size()) + " is too short for " +
              std::to_string(levels) + " levels");
  for (double v : signal) require(std::isfinite(v), "dwt: non-finite sample");

  DecompositionResult out;
  out.levels = levels;
  out.original_length = signal.size();
  out.padded_length = (signal.size() + block - 1) / block * block;

  std::vector<double> current(signal.begin(), signal.end());
  current.resize(out.padded_length, 0.0);
  std::vector<double> a, d;
  for (int l = 0; l < levels; ++l) {
    detail::analysis_step(current, a, d);
    out.details.push_back(d);
    current.swap(a);
  }
  out.approx = std::move(current);
  return out;
}

inline std::vector<double> idwt(const DecompositionResult& dec) {
  require(static_cast<int>(dec.details.size()) == dec.levels, "idwt: level count mismatch");
  std::vector<double> current = dec.approx;
  for (int l = dec.levels - 1; l >= 0; --l) {
    require(dec.details[l].size() == current.size(), "idwt: band length mismatch");
    current = detail::synthesis_step(current, dec.details[l]);
  }
  current.resize(dec.original_length);
  return current;
}

/// Time-domain signal carried by the approximation band alone.
inline std::vector<double> reconstruct_approx(const DecompositionResult& dec) {
  DecompositionResult only = dec;
  for (auto& d : only.details) std::fill(d.begin(), d.end(), 0.0);
  return idwt(only);
}

/// Time-domain signal carried by all detail bands together.
inline std::vector<double> reconstruct_details(const DecompositionResult& dec) {
  DecompositionResult only = dec;
  std::fill(only.approx.begin(), only.approx.end(), 0.0);
  return idwt(only);
}

}  // namespace gridfault::wavefeat
