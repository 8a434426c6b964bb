#include <cmath>

#include <Eigen/SVD>

#include "nirs/error.hpp"
#include "nirs/kernels.hpp"
#include "nirs/preproc.hpp"

namespace nirs::preproc {

namespace {

constexpr int kMaxIterations = 100;
constexpr double kTolerance = 1e-8;

double norm(std::span<const double> v) { return std::sqrt(simd::dot(v, v)); }

// Modified Gram-Schmidt; drops vectors whose residual falls below
// rel_tol * (largest input norm).
std::vector<std::vector<double>> orthonormal_basis(std::vector<std::vector<double>> vs, double rel_tol) {
  double scale = 0.0;
  for (const auto& v : vs) scale = std::max(scale, norm(v));
  std::vector<std::vector<double>> basis;
  if (scale == 0.0) return basis;
  for (auto& v : vs) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) simd::axpy(-simd::dot(q, v), q, v);
    const double nv = norm(v);
    if (nv <= rel_tol * scale) continue;
    for (double& x : v) x /= nv;
    basis.push_back(std::move(v));
  }
  return basis;
}

void project_out(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) simd::axpy(-simd::dot(q, v), q, v);
}

}  // namespace

OscFit osc_fit(const Matrix& X_cal, const Matrix& Y_cal, int n_components) {
  if (n_components < 1) throw ParameterError("osc n_components must be >= 1");
  if (Y_cal.rows() != X_cal.rows()) throw DataError("osc: target rows differ from spectra rows");
  const std::size_t n = X_cal.rows();
  const std::size_t p = X_cal.cols();
  if (n < 2) throw DegenerateInput("osc needs at least 2 calibration rows");

  OscFit fit;
  fit.state.means = X_cal.column_means();
  Matrix X = X_cal;
  center_rows(X, fit.state.means);

  // Orthonormal basis of the centred target space.
  std::vector<std::vector<double>> ycols;
  const std::vector<double> ymeans = Y_cal.column_means();
  for (std::size_t c = 0; c < Y_cal.cols(); ++c) {
    std::vector<double> col = Y_cal.column(c);
    for (double& v : col) v -= ymeans[c];
    ycols.push_back(std::move(col));
  }
  const auto y_basis = orthonormal_basis(ycols, 1e-12);
  if (y_basis.empty()) throw DegenerateInput("osc: calibration targets have no variance");

  // Directions w with X w correlated to y are excluded: w must stay
  // orthogonal to span(X^T y). Deflation by y-orthogonal scores leaves X^T y
  // unchanged, so the span is computed once.
  std::vector<std::vector<double>> xty;
  for (const auto& q : y_basis) xty.push_back(transpose_times(X, q));
  double xnorm = 0.0;
  for (double v : X.data()) xnorm += v * v;
  xnorm = std::sqrt(xnorm);
  std::vector<std::vector<double>> w_excluded;
  {
    double xty_scale = 0.0;
    for (const auto& v : xty) xty_scale = std::max(xty_scale, norm(v));
    if (xty_scale > 1e-12 * std::max(1.0, xnorm)) w_excluded = orthonormal_basis(xty, 1e-10);
  }

  const auto k = static_cast<std::size_t>(n_components);
  fit.state.weights = Matrix(k, p);
  fit.state.loadings = Matrix(k, p);
  fit.scores = Matrix(n, k);

  for (std::size_t a = 0; a < k; ++a) {
    // Start from the first principal component of the current residual.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(as_eigen(X), Eigen::ComputeThinV);
    std::vector<double> w(p, 0.0);
    if (svd.matrixV().cols() > 0)
      for (std::size_t j = 0; j < p; ++j) w[j] = svd.matrixV()(static_cast<Eigen::Index>(j), 0);
    project_out(w, w_excluded);
    double nw = norm(w);
    if (!(nw > 1e-12)) throw DegenerateInput("osc: no target-orthogonal variation left");
    for (double& v : w) v /= nw;
    std::vector<double> t = times(X, w);

    bool converged = false;
    int it = 0;
    for (; it < kMaxIterations; ++it) {
      std::vector<double> t_orth = t;
      project_out(t_orth, y_basis);
      const double tt = simd::dot(t_orth, t_orth);
      if (!(tt > 0.0)) throw DegenerateInput("osc: score collapsed onto the targets");
      w = transpose_times(X, t_orth);
      for (double& v : w) v /= tt;
      project_out(w, w_excluded);
      nw = norm(w);
      if (!(nw > 0.0)) throw DegenerateInput("osc: weight vector vanished");
      for (double& v : w) v /= nw;
      std::vector<double> t_new = times(X, w);
      const double dt = std::sqrt(simd::squared_distance(t_new, t));
      const double tn = norm(t_new);
      t = std::move(t_new);
      if (dt <= kTolerance * std::max(1.0, tn)) {
        converged = true;
        ++it;
        break;
      }
    }
    fit.state.converged.push_back(converged);
    fit.state.iterations.push_back(it);

    const double tt = simd::dot(t, t);
    if (!(tt > 0.0)) throw DegenerateInput("osc: zero score vector");
    std::vector<double> load = transpose_times(X, t);
    for (double& v : load) v /= tt;
    for (std::size_t r = 0; r < n; ++r) simd::axpy(-t[r], load, X.row(r));
    std::copy(w.begin(), w.end(), fit.state.weights.row(a).begin());
    std::copy(load.begin(), load.end(), fit.state.loadings.row(a).begin());
    for (std::size_t r = 0; r < n; ++r) fit.scores(r, a) = t[r];
  }

  for (std::size_t r = 0; r < n; ++r) simd::axpy(1.0, fit.state.means, X.row(r));
  fit.deflated = std::move(X);
  return fit;
}

Matrix osc_apply(const OscState& st, const Matrix& X_in) {
  if (X_in.cols() != st.means.size()) throw DataError("osc: feature count differs from fit");
  Matrix X = X_in;
  center_rows(X, st.means);
  for (std::size_t a = 0; a < st.weights.rows(); ++a) {
    const std::vector<double> t = times(X, st.weights.row(a));
    for (std::size_t r = 0; r < X.rows(); ++r) simd::axpy(-t[r], st.loadings.row(a), X.row(r));
  }
  for (std::size_t r = 0; r < X.rows(); ++r) simd::axpy(1.0, st.means, X.row(r));
  return X;
}

}  // namespace nirs::preproc
