#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "nirs/dataset.hpp"
#include "nirs/matrix.hpp"

namespace nirs::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = -1.0,
                            double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = u(rng);
  return m;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return max_abs_diff(a.data(), b.data()); }

/// Smooth synthetic spectra driven by a few latent concentrations; y is a
/// linear function of the first one.
inline Dataset linear_dataset(const std::string& name, std::size_t n, std::size_t p, std::uint64_t seed,
                              double noise = 0.01) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t k = 3;
  std::vector<std::vector<double>> bands(k, std::vector<double>(p));
  for (std::size_t c = 0; c < k; ++c) {
    const double centre = (static_cast<double>(c) + 0.5) * static_cast<double>(p) / static_cast<double>(k);
    const double width = 0.08 * static_cast<double>(p);
    for (std::size_t j = 0; j < p; ++j) {
      const double d = (static_cast<double>(j) - centre) / width;
      bands[c][j] = std::exp(-0.5 * d * d);
    }
  }
  Matrix X(n, p);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double conc[3];
    for (double& c : conc) c = u(rng);
    y[i] = 10.0 * conc[0] + noise * g(rng);
    for (std::size_t j = 0; j < p; ++j) {
      double v = 0.1;
      for (std::size_t c = 0; c < k; ++c) v += conc[c] * bands[c][j];
      X(i, j) = v + noise * g(rng);
    }
  }
  Dataset ds;
  ds.name = name;
  ds.database = name;
  ds.task = Task::regression;
  ds.X = SpectraMatrix(std::move(X));
  ds.y.kind = Task::regression;
  ds.y.values = std::move(y);
  ds.split.method = SplitMethod::spxy;
  ds.split.test_fraction = 0.25;
  return ds;
}

/// Two or more well separated classes; class c raises band c.
inline Dataset class_dataset(const std::string& name, std::size_t n_per_class, std::size_t p, int n_classes,
                             std::uint64_t seed, double noise = 0.05) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t n = n_per_class * static_cast<std::size_t>(n_classes);
  Matrix X(n, p);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % static_cast<std::size_t>(n_classes));
    labels[i] = c;
    const double centre = (c + 0.5) * static_cast<double>(p) / n_classes;
    for (std::size_t j = 0; j < p; ++j) {
      const double d = (static_cast<double>(j) - centre) / (0.08 * static_cast<double>(p));
      X(i, j) = 0.5 + std::exp(-0.5 * d * d) + noise * g(rng);
    }
  }
  Dataset ds;
  ds.name = name;
  ds.database = name;
  ds.task = Task::classification;
  ds.X = SpectraMatrix(std::move(X));
  ds.y.kind = Task::classification;
  ds.y.labels = std::move(labels);
  for (int c = 0; c < n_classes; ++c) ds.y.label_names.push_back("class" + std::to_string(c));
  ds.split.method = SplitMethod::spxy_stratified;
  ds.split.test_fraction = 0.25;
  return ds;
}

/// Narrow analyte band on top of broad, randomly placed humps, with
/// per-sample multiplicative scatter and offset. Derivatives suppress the
/// humps; raw spectra leave PLS fighting them.
inline Dataset derivative_scatter_dataset(std::size_t n = 120, std::size_t p = 64, std::uint64_t seed = 8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  auto gauss = [](double x, double c, double w) {
    const double d = (x - c) / w;
    return std::exp(-0.5 * d * d);
  };
  const double P = static_cast<double>(p);
  Matrix X(n, p);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double conc = u(rng);
    const double scatter = 0.5 + u(rng);
    const double offset = 2.0 * u(rng);
    double hump_c[3], hump_w[3], hump_a[3];
    for (int h = 0; h < 3; ++h) {
      hump_c[h] = P * u(rng);
      hump_w[h] = 0.15 * P + 0.15 * P * u(rng);
      hump_a[h] = 3.0 * u(rng);
    }
    y[i] = conc;
    for (std::size_t j = 0; j < p; ++j) {
      const double x = static_cast<double>(j);
      double v = conc * gauss(x, 0.5 * P, 1.5) + 0.6 * gauss(x, 0.25 * P, 1.5) + 0.6 * gauss(x, 0.75 * P, 1.5);
      for (int h = 0; h < 3; ++h) v += hump_a[h] * gauss(x, hump_c[h], hump_w[h]);
      X(i, j) = offset + scatter * v + 0.002 * g(rng);
    }
  }
  Dataset ds;
  ds.name = "derivative_scatter";
  ds.database = "synthetic";
  ds.task = Task::regression;
  ds.X = SpectraMatrix(std::move(X));
  ds.y.kind = Task::regression;
  ds.y.values = std::move(y);
  ds.split.method = SplitMethod::spxy;
  ds.split.test_fraction = 0.25;
  return ds;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("nirs_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  os << text;
}

}  // namespace nirs::testing
