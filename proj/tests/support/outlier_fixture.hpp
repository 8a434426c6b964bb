#pragma once

#include <cmath>
#include <random>

#include "nirs/matrix.hpp"

namespace nirs::testing {

/// Spectra from four Gaussian-shaped bands whose intensities vary by 10%
/// around fixed means, plus white noise; calibration and test rows share
/// the distribution.
inline double band_mean(int k) { return 1.0 - 0.1 * k; }

/// Band k's profile at column j of p.
inline double band_shape(int k, std::size_t j, std::size_t p) {
  const double P = static_cast<double>(p);
  const double d = (static_cast<double>(j) - (k + 0.5) * P / 4.0) / (0.07 * P);
  return std::exp(-0.5 * d * d);
}

inline Matrix latent_spectra(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix X(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    double c[4];
    for (double& v : c) v = g(rng);
    for (std::size_t j = 0; j < p; ++j) {
      double v = 5.0;
      for (int k = 0; k < 4; ++k) v += (band_mean(k) + 0.1 * c[k]) * band_shape(k, j, p);
      X(i, j) = v + 0.002 * g(rng);
    }
  }
  return X;
}

}  // namespace nirs::testing
