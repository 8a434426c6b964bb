#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nirs/dataset.hpp"
#include "nirs/matrix.hpp"

namespace nirs::models {

constexpr int kMaxPlsComponents = 30;

enum class PredictorKind { pls, plsda, ridge, external };

struct PredictorSpec {
  PredictorKind kind = PredictorKind::pls;
  int n_components = 1;  // pls, plsda
  double alpha = 1.0;    // ridge
  std::string model_id;  // external

  static PredictorSpec pls(int a) { return {PredictorKind::pls, a, 1.0, {}}; }
  static PredictorSpec plsda(int a) { return {PredictorKind::plsda, a, 1.0, {}}; }
  static PredictorSpec ridge(double alpha) { return {PredictorKind::ridge, 1, alpha, {}}; }
  static PredictorSpec external(std::string id) { return {PredictorKind::external, 1, 1.0, std::move(id)}; }

  void validate() const;
  /// Hyperparameter text for reports: "n_components=3", "alpha=0.01", "fixed".
  std::string hyperparams_text() const;
};

/// NIPALS partial least squares on centred X and Y (PLS1 when Y has one
/// column, PLS2 otherwise). Rows of w/p/q are components.
struct PlsModel {
  std::vector<double> x_means;
  std::vector<double> y_means;
  Matrix weights;    // A x p
  Matrix loadings;   // A x p
  Matrix y_loadings; // A x m
  Matrix scores;     // n x A (calibration)
  int requested = 0;
  bool truncated = false;  // covariance exhausted before `requested`

  int components() const { return static_cast<int>(weights.rows()); }
  /// Regression coefficients (p x m) using the first `a` components:
  /// W (P^T W)^-1 Q^T.
  Matrix coefficients(int a) const;
  /// Predictions for every prefix a = 1..components() in one deflation
  /// pass over the query rows; element a-1 is n_query x m.
  std::vector<Matrix> predict_path(const Matrix& X) const;
};

PlsModel pls_nipals(const Matrix& X, const Matrix& Y, int n_components);

/// Ridge solution by Cholesky of the regularised normal equations (primal
/// when p <= n, dual otherwise).
struct RidgeModel {
  std::vector<double> x_means;  // zeros when fit without intercept
  double y_mean = 0.0;
  std::vector<double> beta;
  double alpha = 1.0;
};

RidgeModel ridge_solve(const Matrix& X, std::span<const double> y, double alpha, bool fit_intercept = true);

/// Eigendecomposition of the smaller Gram matrix of centred X, shared by all
/// alphas. Predictions for alpha follow from
///   yhat = y_mean + Z diag(1/(lambda + alpha)) r
/// with Z the query projection from `project`.
class RidgePath {
 public:
  RidgePath(const Matrix& X, std::span<const double> y);

  Matrix project(const Matrix& X_query) const;
  std::vector<double> predict(const Matrix& projected, double alpha) const;
  std::vector<double> coefficients(double alpha) const;

 private:
  bool dual_ = false;
  std::vector<double> x_means_;
  double y_mean_ = 0.0;
  Matrix centered_;   // n x p
  Eigen::MatrixXd basis_;  // eigenvectors (n x r dual, p x r primal)
  Eigen::VectorXd eigenvalues_;
  Eigen::VectorXd rhs_;    // basis^T (X^T y) primal, basis^T y dual
};

/// Common predictor contract for the built-in calibrators: linear map
/// yhat = y_mean + (x - x_mean) B, argmax over columns for classification.
class FittedPredictor {
 public:
  FittedPredictor() = default;
  FittedPredictor(PredictorSpec spec, Task task, std::vector<double> x_means, std::vector<double> y_means,
                  Matrix coefficients, bool truncated, int used_components);

  const PredictorSpec& spec() const { return spec_; }
  Task task() const { return task_; }
  std::size_t n_features() const { return x_means_.size(); }
  const Matrix& coefficients() const { return coef_; }
  bool truncated() const { return truncated_; }
  int used_components() const { return used_components_; }

  /// Regression predictions (analyte units). Throws DataError on a column
  /// count mismatch.
  std::vector<double> predict(const Matrix& X) const;
  /// Class scores, n x C.
  Matrix decision_scores(const Matrix& X) const;
  /// Classification: argmax of class scores, ties to the lowest id.
  std::vector<int> predict_labels(const Matrix& X) const;

 private:
  PredictorSpec spec_;
  Task task_ = Task::regression;
  std::vector<double> x_means_;
  std::vector<double> y_means_;
  Matrix coef_;  // p x m
  bool truncated_ = false;
  int used_components_ = 0;
};

FittedPredictor pls_fit(const Matrix& X, std::span<const double> y, int n_components);
FittedPredictor plsda_fit(const Matrix& X, std::span<const int> labels, int n_classes, int n_components);
FittedPredictor ridge_fit(const Matrix& X, std::span<const double> y, double alpha, bool fit_intercept = true);

std::vector<int> argmax_rows(const Matrix& scores);

}  // namespace nirs::models
