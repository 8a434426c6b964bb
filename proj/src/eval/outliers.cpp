#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "nirs/error.hpp"
#include "nirs/eval.hpp"
#include "nirs/preproc.hpp"
#include "nirs/stats.hpp"

namespace nirs::eval {

std::vector<double> HotellingModel::t2(const Matrix& X) const {
  if (X.cols() != means.size()) throw DataError("hotelling: feature count differs from calibration");
  Matrix Xc = X;
  center_rows(Xc, means);
  std::vector<double> out(X.rows(), 0.0);
  for (std::size_t a = 0; a < components.rows(); ++a) {
    const std::vector<double> t = times(Xc, components.row(a));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t[i] * t[i] / score_variance[a];
  }
  return out;
}

HotellingModel fit_hotelling(const Matrix& X_cal, double variance_target, double quantile) {
  const std::size_t n = X_cal.rows();
  if (n < 3) throw DegenerateInput("hotelling: need at least 3 calibration rows");
  HotellingModel m;
  m.n_calibration = static_cast<int>(n);
  m.means = X_cal.column_means();
  Matrix Xc = X_cal;
  center_rows(Xc, m.means);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(as_eigen(Xc), Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  const double total = s.squaredNorm();
  if (!(total > 0.0)) throw DegenerateInput("hotelling: calibration spectra have no variance");

  double cum = 0.0;
  int a95 = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double ratio = s(i) * s(i) / total;
    m.explained_ratio.push_back(ratio);
    cum += ratio;
    if (a95 == 0 && cum >= variance_target - 1e-12) a95 = static_cast<int>(i) + 1;
  }
  if (a95 == 0) a95 = static_cast<int>(s.size());
  if (static_cast<std::size_t>(a95) + 1 >= n)
    throw DegenerateInput("hotelling: " + std::to_string(a95) + " components need more than " + std::to_string(n) +
                          " calibration rows");

  const auto p = X_cal.cols();
  m.components = Matrix(static_cast<std::size_t>(a95), p);
  for (int a = 0; a < a95; ++a) {
    for (std::size_t j = 0; j < p; ++j)
      m.components(static_cast<std::size_t>(a), j) = svd.matrixV()(static_cast<Eigen::Index>(j), a);
    m.score_variance.push_back(s(a) * s(a) / static_cast<double>(n - 1));
  }
  const double A = a95;
  const double nn = static_cast<double>(n);
  m.threshold = A * (nn - 1.0) / (nn - A) * stats::f_quantile(quantile, A, nn - A);
  return m;
}

namespace {

// SNV per row, collecting rows where it is undefined.
Matrix snv_rows(const Matrix& X, std::vector<std::size_t>& excluded, std::vector<std::size_t>& kept) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    try {
      rows.push_back(preproc::snv(X.row(i)));
      kept.push_back(i);
    } catch (const DegenerateInput&) {
      excluded.push_back(i);
    }
  }
  if (rows.empty()) return Matrix(0, X.cols());
  return Matrix::from_rows(rows);
}

}  // namespace

OutlierReport detect_spectral_outliers(const Matrix& X_cal, const Matrix& X_test) {
  if (X_cal.cols() != X_test.cols()) throw DataError("outliers: calibration and test feature counts differ");
  OutlierReport r;
  std::vector<std::size_t> kept_cal, kept_test;
  const Matrix cal = snv_rows(X_cal, r.excluded_calibration, kept_cal);
  const Matrix test = snv_rows(X_test, r.excluded_test, kept_test);
  const HotellingModel model = fit_hotelling(cal);
  r.a95 = model.components_used();
  r.n_calibration = model.n_calibration;
  r.threshold = model.threshold;
  r.t2.assign(X_test.rows(), std::numeric_limits<double>::quiet_NaN());
  if (test.rows() > 0) {
    const auto t2 = model.t2(test);
    for (std::size_t k = 0; k < kept_test.size(); ++k) {
      r.t2[kept_test[k]] = t2[k];
      if (t2[k] > model.threshold) r.outliers.push_back(kept_test[k]);
    }
  }
  return r;
}

}  // namespace nirs::eval
