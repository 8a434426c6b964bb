#include <cmath>

#include <Eigen/Dense>

#include "nirs/error.hpp"
#include "nirs/kernels.hpp"
#include "nirs/preproc.hpp"

namespace nirs::preproc {

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  std::ptrdiff_t k = i % period;
  if (k < 0) k += period;
  if (k >= static_cast<std::ptrdiff_t>(n)) k = period - k;
  return static_cast<std::size_t>(k);
}

std::vector<double> reflect_pad(std::span<const double> x, std::size_t radius) {
  const std::size_t n = x.size();
  std::vector<double> out(n + 2 * radius);
  const auto r = static_cast<std::ptrdiff_t>(radius);
  for (std::ptrdiff_t i = -r; i < static_cast<std::ptrdiff_t>(n) + r; ++i)
    out[static_cast<std::size_t>(i + r)] = x[reflect_index(i, n)];
  return out;
}

std::vector<double> savgol_coefficients(int window, int polyorder, int deriv) {
  StepSpec::savgol(window, polyorder, deriv).validate();
  const int half = window / 2;
  Eigen::MatrixXd A(window, polyorder + 1);
  for (int i = 0; i < window; ++i) {
    const double s = i - half;
    double v = 1.0;
    for (int j = 0; j <= polyorder; ++j) {
      A(i, j) = v;
      v *= s;
    }
  }
  // Row `deriv` of the least-squares solve maps window samples to the
  // polynomial coefficient a_deriv; the derivative at the centre is deriv! a_deriv.
  const Eigen::MatrixXd solve = A.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));
  double factorial = 1.0;
  for (int k = 2; k <= deriv; ++k) factorial *= k;
  std::vector<double> c(static_cast<std::size_t>(window));
  for (int i = 0; i < window; ++i) c[static_cast<std::size_t>(i)] = factorial * solve(deriv, i);
  return c;
}

namespace {

Matrix correlate_rows(const Matrix& X, const std::vector<double>& kernel) {
  const std::size_t radius = kernel.size() / 2;
  Matrix out(X.rows(), X.cols());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const std::vector<double> padded = reflect_pad(X.row(r), radius);
    simd::correlate(padded, kernel, out.row(r));
  }
  return out;
}

}  // namespace

Matrix savgol(const Matrix& X, int window, int polyorder, int deriv) {
  if (X.cols() < static_cast<std::size_t>(window))
    throw ParameterError("savgol window " + std::to_string(window) + " exceeds spectrum length " +
                         std::to_string(X.cols()));
  return correlate_rows(X, savgol_coefficients(window, polyorder, deriv));
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("gaussian sigma must be > 0");
  const auto radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i / sigma) * (i / sigma));
    k[static_cast<std::size_t>(i + radius)] = w;
    total += w;
  }
  for (double& w : k) w /= total;
  return k;
}

Matrix gaussian_smooth(const Matrix& X, double sigma) { return correlate_rows(X, gaussian_kernel(sigma)); }

}  // namespace nirs::preproc
