#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace nirs::simd {

// Data-parallel inner loops. Every entry has a scalar reference
// implementation; vector variants must agree with it up to summation order.
struct KernelTable {
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // out[i] = sum_k kernel[k] * in[i + k], for i in [0, n_out)
  void (*correlate)(const double* in, const double* kernel, std::size_t n_kernel,
                    double* out, std::size_t n_out);
};

const KernelTable& scalar_kernels();

/// nullptr when the build or the running CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

/// Table used by the library. Picked once: AVX2 when supported, unless the
/// NIRS_SIMD environment variable is set to "scalar".
const KernelTable& active_kernels();

/// Overrides the active table (tests and benchmarks).
void set_active_kernels(const KernelTable& table);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active_kernels().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active_kernels().axpy(alpha, x.data(), y.data(), x.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active_kernels().squared_distance(a.data(), b.data(), a.size());
}

inline void correlate(std::span<const double> in, std::span<const double> kernel,
                      std::span<double> out) {
  active_kernels().correlate(in.data(), kernel.data(), kernel.size(), out.data(), out.size());
}

}  // namespace nirs::simd
