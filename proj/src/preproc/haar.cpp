#include <algorithm>
#include <cmath>

#include "nirs/error.hpp"
#include "nirs/preproc.hpp"

namespace nirs::preproc {

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

std::vector<double> haar_forward(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ParameterError("haar_forward needs a power-of-two length");
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<double> out(x.begin(), x.end());
  std::vector<double> approx(x.begin(), x.end());
  for (std::size_t len = n; len > 1; len /= 2) {
    const std::size_t half = len / 2;
    std::vector<double> next(half);
    for (std::size_t i = 0; i < half; ++i) {
      next[i] = (approx[2 * i] + approx[2 * i + 1]) * s;
      out[half + i] = (approx[2 * i] - approx[2 * i + 1]) * s;
    }
    approx = std::move(next);
  }
  out[0] = approx[0];
  return out;
}

std::vector<double> haar_inverse(std::span<const double> c) {
  const std::size_t n = c.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ParameterError("haar_inverse needs a power-of-two length");
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<double> approx{c[0]};
  for (std::size_t half = 1; half < n; half *= 2) {
    std::vector<double> next(2 * half);
    for (std::size_t i = 0; i < half; ++i) {
      next[2 * i] = (approx[i] + c[half + i]) * s;
      next[2 * i + 1] = (approx[i] - c[half + i]) * s;
    }
    approx = std::move(next);
  }
  return approx;
}

Matrix haar_transform(const Matrix& X) {
  if (X.cols() < 2) throw ParameterError("haar transform needs at least 2 channels");
  const std::size_t padded = next_pow2(X.cols());
  Matrix out(X.rows(), padded);
  std::vector<double> row(padded);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto x = X.row(r);
    for (std::size_t i = 0; i < padded; ++i) row[i] = x[std::min(i, x.size() - 1)];
    const std::vector<double> c = haar_forward(row);
    std::copy(c.begin(), c.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace nirs::preproc
