#include <cmath>

#include "nirs/error.hpp"
#include "nirs/kernels.hpp"
#include "nirs/models.hpp"

namespace nirs::models {

namespace {

constexpr int kPls2MaxIterations = 500;
constexpr double kPls2Tolerance = 1e-12;

double norm(std::span<const double> v) { return std::sqrt(simd::dot(v, v)); }

}  // namespace

PlsModel pls_nipals(const Matrix& X_in, const Matrix& Y_in, int n_components) {
  if (X_in.rows() != Y_in.rows()) throw DataError("pls: X and Y row counts differ");
  if (n_components < 1) throw ParameterError("pls needs at least one component");
  const std::size_t n = X_in.rows();
  const std::size_t p = X_in.cols();
  const std::size_t m = Y_in.cols();
  if (n < 2) throw DegenerateInput("pls needs at least 2 calibration rows");
  const auto max_a = std::min<std::size_t>({static_cast<std::size_t>(n_components), n - 1, p});

  PlsModel model;
  model.requested = n_components;
  model.x_means = X_in.column_means();
  model.y_means = Y_in.column_means();
  Matrix X = X_in;
  Matrix Y = Y_in;
  center_rows(X, model.x_means);
  center_rows(Y, model.y_means);

  std::vector<std::vector<double>> W, P, Q, T;
  double initial_cov = -1.0;

  for (std::size_t a = 0; a < max_a; ++a) {
    // Starting response: the Y column with the largest remaining variance.
    std::vector<double> u;
    {
      std::size_t best = 0;
      double best_ss = -1.0;
      for (std::size_t c = 0; c < m; ++c) {
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) ss += Y(r, c) * Y(r, c);
        if (ss > best_ss) {
          best_ss = ss;
          best = c;
        }
      }
      u = Y.column(best);
    }

    std::vector<double> w = transpose_times(X, u);
    double wn = norm(w);
    if (initial_cov < 0.0) initial_cov = wn;
    if (!(wn > 1e-12 * std::max(1.0, initial_cov))) {
      model.truncated = true;
      break;
    }
    for (double& v : w) v /= wn;
    std::vector<double> t = times(X, w);
    double tt = simd::dot(t, t);
    std::vector<double> c(m);

    if (m == 1) {
      c[0] = simd::dot(Y.column(0), t) / tt;
    } else {
      for (int it = 0; it < kPls2MaxIterations; ++it) {
        for (std::size_t k = 0; k < m; ++k) {
          double s = 0.0;
          for (std::size_t r = 0; r < n; ++r) s += Y(r, k) * t[r];
          c[k] = s / tt;
        }
        const double cc = simd::dot(c, c);
        if (!(cc > 0.0)) break;
        std::vector<double> u_new = times(Y, c);
        for (double& v : u_new) v /= cc;
        const double du = std::sqrt(simd::squared_distance(u_new, u));
        const double un = norm(u_new);
        u = std::move(u_new);
        w = transpose_times(X, u);
        wn = norm(w);
        if (!(wn > 0.0)) break;
        for (double& v : w) v /= wn;
        t = times(X, w);
        tt = simd::dot(t, t);
        if (du <= kPls2Tolerance * std::max(1.0, un)) break;
      }
      for (std::size_t k = 0; k < m; ++k) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += Y(r, k) * t[r];
        c[k] = s / tt;
      }
    }
    if (!(tt > 0.0)) {
      model.truncated = true;
      break;
    }

    std::vector<double> load = transpose_times(X, t);
    for (double& v : load) v /= tt;
    for (std::size_t r = 0; r < n; ++r) {
      simd::axpy(-t[r], load, X.row(r));
      simd::axpy(-t[r], c, Y.row(r));
    }
    W.push_back(std::move(w));
    P.push_back(std::move(load));
    Q.push_back(c);
    T.push_back(std::move(t));
  }
  if (W.size() < static_cast<std::size_t>(n_components) && W.size() == max_a && max_a < static_cast<std::size_t>(n_components))
    model.truncated = true;
  if (W.empty()) throw DegenerateInput("pls: no covariance between X and Y");

  const std::size_t A = W.size();
  model.weights = Matrix(A, p);
  model.loadings = Matrix(A, p);
  model.y_loadings = Matrix(A, m);
  model.scores = Matrix(n, A);
  for (std::size_t a = 0; a < A; ++a) {
    std::copy(W[a].begin(), W[a].end(), model.weights.row(a).begin());
    std::copy(P[a].begin(), P[a].end(), model.loadings.row(a).begin());
    std::copy(Q[a].begin(), Q[a].end(), model.y_loadings.row(a).begin());
    for (std::size_t r = 0; r < n; ++r) model.scores(r, a) = T[a][r];
  }
  return model;
}

Matrix PlsModel::coefficients(int a) const {
  if (a < 1 || a > components()) throw ParameterError("pls: component count out of range");
  const auto A = static_cast<Eigen::Index>(a);
  const auto W = as_eigen(weights).topRows(A).transpose();   // p x a
  const auto P = as_eigen(loadings).topRows(A).transpose();  // p x a
  const auto Q = as_eigen(y_loadings).topRows(A);            // a x m
  const Eigen::MatrixXd PtW = P.transpose() * W;
  const Eigen::MatrixXd B = W * PtW.partialPivLu().solve(Eigen::MatrixXd(Q));
  Matrix out(static_cast<std::size_t>(B.rows()), static_cast<std::size_t>(B.cols()));
  as_eigen(out) = B;
  return out;
}

std::vector<Matrix> PlsModel::predict_path(const Matrix& X_in) const {
  if (X_in.cols() != x_means.size()) throw DataError("pls: feature count differs from training");
  Matrix X = X_in;
  center_rows(X, x_means);
  const std::size_t n = X.rows();
  const std::size_t m = y_means.size();
  Matrix acc(n, m);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < m; ++k) acc(r, k) = y_means[k];
  std::vector<Matrix> out;
  for (std::size_t a = 0; a < weights.rows(); ++a) {
    const std::vector<double> t = times(X, weights.row(a));
    for (std::size_t r = 0; r < n; ++r) {
      simd::axpy(-t[r], loadings.row(a), X.row(r));
      simd::axpy(t[r], y_loadings.row(a), acc.row(r));
    }
    out.push_back(acc);
  }
  return out;
}

}  // namespace nirs::models
