#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "nirs/error.hpp"
#include "nirs/models.hpp"

namespace nirs::models {

RidgeModel ridge_solve(const Matrix& X_in, std::span<const double> y, double alpha, bool fit_intercept) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError("ridge alpha must be > 0");
  if (X_in.rows() != y.size()) throw DataError("ridge: X and y lengths differ");
  if (X_in.rows() == 0) throw DataError("ridge: empty calibration set");
  const std::size_t n = X_in.rows();
  const std::size_t p = X_in.cols();

  RidgeModel m;
  m.alpha = alpha;
  Matrix X = X_in;
  std::vector<double> yc(y.begin(), y.end());
  if (fit_intercept) {
    m.x_means = X.column_means();
    m.y_mean = mean(y);
    center_rows(X, m.x_means);
    for (double& v : yc) v -= m.y_mean;
  } else {
    m.x_means.assign(p, 0.0);
  }
  const auto A = as_eigen(X);
  const Eigen::Map<const Eigen::VectorXd> Y(yc.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd beta;
  if (p <= n) {
    Eigen::MatrixXd G = A.transpose() * A;
    G.diagonal().array() += alpha;
    beta = G.llt().solve(A.transpose() * Y);
  } else {
    Eigen::MatrixXd K = A * A.transpose();
    K.diagonal().array() += alpha;
    beta = A.transpose() * K.llt().solve(Y);
  }
  m.beta.assign(beta.data(), beta.data() + beta.size());
  return m;
}

RidgePath::RidgePath(const Matrix& X, std::span<const double> y) {
  if (X.rows() != y.size()) throw DataError("ridge: X and y lengths differ");
  if (X.rows() == 0) throw DataError("ridge: empty calibration set");
  const std::size_t n = X.rows();
  const std::size_t p = X.cols();
  x_means_ = X.column_means();
  y_mean_ = mean(y);
  centered_ = X;
  center_rows(centered_, x_means_);
  Eigen::VectorXd yc(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) yc(static_cast<Eigen::Index>(i)) = y[i] - y_mean_;

  const auto A = as_eigen(centered_);
  dual_ = p > n;
  const Eigen::MatrixXd G = dual_ ? Eigen::MatrixXd(A * A.transpose()) : Eigen::MatrixXd(A.transpose() * A);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  if (es.info() != Eigen::Success) throw DegenerateInput("ridge: eigendecomposition failed");
  basis_ = es.eigenvectors();
  eigenvalues_ = es.eigenvalues().cwiseMax(0.0);
  rhs_ = dual_ ? Eigen::VectorXd(basis_.transpose() * yc) : Eigen::VectorXd(basis_.transpose() * (A.transpose() * yc));
}

Matrix RidgePath::project(const Matrix& X_query) const {
  if (X_query.cols() != x_means_.size()) throw DataError("ridge: feature count differs from training");
  Matrix Q = X_query;
  center_rows(Q, x_means_);
  const auto Qe = as_eigen(Q);
  const Eigen::MatrixXd Z = dual_ ? Eigen::MatrixXd((Qe * as_eigen(centered_).transpose()) * basis_)
                                  : Eigen::MatrixXd(Qe * basis_);
  Matrix out(static_cast<std::size_t>(Z.rows()), static_cast<std::size_t>(Z.cols()));
  as_eigen(out) = Z;
  return out;
}

std::vector<double> RidgePath::predict(const Matrix& projected, double alpha) const {
  if (!(alpha > 0.0)) throw ParameterError("ridge alpha must be > 0");
  const Eigen::VectorXd scaled = rhs_.array() / (eigenvalues_.array() + alpha);
  const Eigen::VectorXd yhat = as_eigen(projected) * scaled;
  std::vector<double> out(static_cast<std::size_t>(yhat.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y_mean_ + yhat(static_cast<Eigen::Index>(i));
  return out;
}

std::vector<double> RidgePath::coefficients(double alpha) const {
  if (!(alpha > 0.0)) throw ParameterError("ridge alpha must be > 0");
  const Eigen::VectorXd scaled = rhs_.array() / (eigenvalues_.array() + alpha);
  Eigen::VectorXd beta = basis_ * scaled;
  if (dual_) beta = as_eigen(centered_).transpose() * beta;
  return {beta.data(), beta.data() + beta.size()};
}

}  // namespace nirs::models
