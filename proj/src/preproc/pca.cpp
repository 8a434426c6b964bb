#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "nirs/error.hpp"
#include "nirs/kernels.hpp"
#include "nirs/preproc.hpp"

namespace nirs::preproc {

std::size_t pca_component_count(std::size_t p, std::size_t n_cal, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ParameterError("pca ratio must lie in (0,1]");
  auto k = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(p)));
  k = std::min(k, n_cal > 0 ? n_cal - 1 : 0);
  k = std::min(k, p);
  return std::max<std::size_t>(1, k);
}

PcaState pca_fit(const Matrix& X_cal, double ratio) {
  if (X_cal.rows() == 0) throw DegenerateInput("pca fit on zero rows");
  const std::size_t k = pca_component_count(X_cal.cols(), X_cal.rows(), ratio);
  PcaState st;
  st.means = X_cal.column_means();
  Matrix centered = X_cal;
  center_rows(centered, st.means);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(as_eigen(centered), Eigen::ComputeThinV);
  const Eigen::MatrixXd& V = svd.matrixV();
  const auto& sv = svd.singularValues();
  st.components = Matrix(k, X_cal.cols());
  const double denom = X_cal.rows() > 1 ? static_cast<double>(X_cal.rows() - 1) : 1.0;
  for (std::size_t a = 0; a < k; ++a) {
    const auto col = static_cast<Eigen::Index>(a);
    const bool available = col < V.cols();
    // Deterministic sign: the largest-magnitude loading entry is positive.
    double sign = 1.0;
    if (available) {
      Eigen::Index arg = 0;
      V.col(col).cwiseAbs().maxCoeff(&arg);
      sign = V(arg, col) < 0 ? -1.0 : 1.0;
    }
    for (std::size_t j = 0; j < X_cal.cols(); ++j)
      st.components(a, j) = available ? sign * V(static_cast<Eigen::Index>(j), col) : 0.0;
    const double s = available && col < sv.size() ? sv(col) : 0.0;
    st.explained_variance.push_back(s * s / denom);
  }
  return st;
}

Matrix pca_apply(const PcaState& st, const Matrix& X) {
  if (X.cols() != st.means.size()) throw DataError("pca: feature count differs from fit");
  Matrix out(X.rows(), st.components.rows());
  std::vector<double> centered(X.cols());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto x = X.row(r);
    for (std::size_t j = 0; j < x.size(); ++j) centered[j] = x[j] - st.means[j];
    for (std::size_t a = 0; a < st.components.rows(); ++a)
      out(r, a) = simd::dot(st.components.row(a), centered);
  }
  return out;
}

}  // namespace nirs::preproc
