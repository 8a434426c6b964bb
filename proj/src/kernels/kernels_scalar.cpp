#include "nirs/kernels.hpp"

namespace nirs::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void correlate_scalar(const double* in, const double* kernel, std::size_t n_kernel,
                      double* out, std::size_t n_out) {
  for (std::size_t i = 0; i < n_out; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < n_kernel; ++k) s += kernel[k] * in[i + k];
    out[i] = s;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", dot_scalar, axpy_scalar, squared_distance_scalar,
                                 correlate_scalar};
  return table;
}

}  // namespace nirs::simd
