#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nirs/matrix.hpp"

namespace nirs::eval {

double rmse(std::span<const double> y, std::span<const double> yhat);

/// Mean per-class recall over the classes present in `y`.
double balanced_accuracy(std::span<const int> y, std::span<const int> yhat);
/// Same, over classes [0, n_classes); throws when a class is absent from `y`.
double balanced_accuracy(std::span<const int> y, std::span<const int> yhat, int n_classes);

/// Percent RMSEP improvement of `cmp` over `ref`; positive is better.
double irmsep(double rmsep_ref, double rmsep_cmp);
/// Percent accuracy change of `cmp` relative to `ref`.
double relative_acc_gain(double acc_ref, double acc_cmp);

/// RMSE restricted to `idx`; empty `idx` gives no value.
std::optional<double> subset_rmse(std::span<const double> y, std::span<const double> yhat,
                                  std::span<const std::size_t> idx);

/// Test rows whose target lies strictly outside the calibration range.
std::vector<std::size_t> extrapolation_indices(std::span<const double> y_train, std::span<const double> y_test);

/// PCA score model for Hotelling's T2 on already-preprocessed spectra.
struct HotellingModel {
  std::vector<double> means;
  Matrix components;                   // A x p
  std::vector<double> score_variance;  // A, (n-1) denominator
  std::vector<double> explained_ratio; // all components, cumulative order
  int n_calibration = 0;
  double threshold = 0.0;

  int components_used() const { return static_cast<int>(components.rows()); }
  std::vector<double> t2(const Matrix& X) const;
};

/// Fits PCA on calibration rows, keeps the smallest component count that
/// explains at least `variance_target` of the variance and sets the
/// F-based upper control limit A(n-1)/(n-A) F_q(A, n-A).
HotellingModel fit_hotelling(const Matrix& X_cal, double variance_target = 0.95, double quantile = 0.95);

struct OutlierReport {
  int a95 = 0;
  int n_calibration = 0;
  double threshold = 0.0;
  std::vector<double> t2;                   // per test row; NaN for excluded rows
  std::vector<std::size_t> outliers;        // test row indices
  std::vector<std::size_t> excluded_test;   // constant spectra, SNV undefined
  std::vector<std::size_t> excluded_calibration;
};

/// SNV on every spectrum, PCA on calibration only, T2 of the test rows
/// against the 95% control limit.
OutlierReport detect_spectral_outliers(const Matrix& X_cal, const Matrix& X_test);

}  // namespace nirs::eval
