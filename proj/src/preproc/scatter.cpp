#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "nirs/error.hpp"
#include "nirs/kernels.hpp"
#include "nirs/preproc.hpp"

namespace nirs::preproc {

std::vector<double> snv(std::span<const double> x) {
  if (x.size() < 2) throw DegenerateInput("snv needs at least 2 channels");
  const double mu = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  const double sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  if (!(sd > 0.0) || sd <= 1e-14 * std::max(1.0, std::abs(mu)))
    throw DegenerateInput("snv of a constant spectrum (zero variance)");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mu) / sd;
  return out;
}

Matrix snv(const Matrix& X) {
  Matrix out(X.rows(), X.cols());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    std::vector<double> s;
    try {
      s = snv(X.row(r));
    } catch (const DegenerateInput& e) {
      throw DegenerateInput("row " + std::to_string(r) + ": " + e.what());
    }
    std::copy(s.begin(), s.end(), out.row(r).begin());
  }
  return out;
}

std::vector<double> area_norm(std::span<const double> x) {
  double total = 0.0;
  for (double v : x) total += std::abs(v);
  if (!(total > 0.0)) throw DegenerateInput("area normalization of an all-zero spectrum");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / total;
  return out;
}

Matrix area_norm(const Matrix& X) {
  Matrix out(X.rows(), X.cols());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    std::vector<double> s;
    try {
      s = area_norm(X.row(r));
    } catch (const DegenerateInput& e) {
      throw DegenerateInput("row " + std::to_string(r) + ": " + e.what());
    }
    std::copy(s.begin(), s.end(), out.row(r).begin());
  }
  return out;
}

// ---- EMSC ---------------------------------------------------------------------

EmscState emsc_with_reference(std::span<const double> reference, int degree) {
  if (degree < 0) throw ParameterError("emsc degree must be >= 0");
  const std::size_t p = reference.size();
  const auto k = static_cast<std::size_t>(degree + 2);
  if (p < k) throw DegenerateInput("emsc needs more channels than model terms");

  // Columns: [1, m, t, t^2, ..., t^degree], t the channel index mapped to [-1, 1].
  Eigen::MatrixXd A(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < p; ++i) {
    const double t = p == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(p - 1);
    const auto r = static_cast<Eigen::Index>(i);
    A(r, 0) = 1.0;
    A(r, 1) = reference[i];
    double tp = t;
    for (int d = 1; d <= degree; ++d) {
      A(r, 1 + d) = tp;
      tp *= t;
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-12);
  if (qr.rank() < static_cast<Eigen::Index>(k))
    throw DegenerateInput("emsc reference spectrum is collinear with the polynomial baseline");
  // Pseudo-inverse P R^-1 Q1^T without forming a p x p identity right-hand side.
  const auto kk = static_cast<Eigen::Index>(k);
  const Eigen::MatrixXd q1 =
      qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), kk);
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(kk, kk).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd rinv_qt =
      r.triangularView<Eigen::Upper>().solve(q1.transpose());
  const Eigen::MatrixXd solve = qr.colsPermutation() * rinv_qt;
  EmscState st;
  st.reference.assign(reference.begin(), reference.end());
  st.degree = degree;
  st.projector = Matrix(k, p);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t i = 0; i < p; ++i)
      st.projector(a, i) = solve(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i));
  return st;
}

EmscState emsc_fit(const Matrix& X_cal, int degree) {
  const std::vector<double> m = X_cal.column_means();
  return emsc_with_reference(m, degree);
}

Matrix emsc_apply(const EmscState& st, const Matrix& X) {
  const std::size_t p = st.reference.size();
  if (X.cols() != p) throw DataError("emsc: feature count differs from the fitted reference");
  const std::size_t k = st.projector.rows();
  Matrix out(X.rows(), p);
  std::vector<double> coef(k);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto z = X.row(r);
    for (std::size_t a = 0; a < k; ++a) coef[a] = simd::dot(st.projector.row(a), z);
    const double b = coef[1];
    if (!(std::abs(b) >= 1e-12))
      throw DegenerateInput("emsc: multiplicative term vanishes for row " + std::to_string(r));
    auto o = out.row(r);
    for (std::size_t i = 0; i < p; ++i) {
      const double t = p == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(p - 1);
      double baseline = coef[0];
      double tp = t;
      for (int d = 1; d <= st.degree; ++d) {
        baseline += coef[static_cast<std::size_t>(1 + d)] * tp;
        tp *= t;
      }
      o[i] = (z[i] - baseline) / b;
    }
  }
  return out;
}

// ---- scalers --------------------------------------------------------------------

ScalerState fit_scaler(const Matrix& X, ScalerKind kind) {
  if (X.rows() == 0) throw DegenerateInput("scaler fit on zero rows");
  ScalerState st;
  st.kind = kind;
  const std::size_t p = X.cols();
  st.offset.assign(p, 0.0);
  st.scale.assign(p, 0.0);
  if (kind == ScalerKind::standard) {
    st.offset = X.column_means();
    std::vector<double> ss(p, 0.0);
    for (std::size_t r = 0; r < X.rows(); ++r)
      for (std::size_t j = 0; j < p; ++j) {
        const double d = X(r, j) - st.offset[j];
        ss[j] += d * d;
      }
    for (std::size_t j = 0; j < p; ++j) {
      const double sd = std::sqrt(ss[j] / static_cast<double>(X.rows()));
      st.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(st.offset[j])) ? sd : 0.0;
    }
  } else {
    for (std::size_t j = 0; j < p; ++j) {
      double lo = X(0, j), hi = X(0, j);
      for (std::size_t r = 1; r < X.rows(); ++r) {
        lo = std::min(lo, X(r, j));
        hi = std::max(hi, X(r, j));
      }
      st.offset[j] = lo;
      const double range = hi - lo;
      st.scale[j] = range > 1e-12 * std::max(1.0, std::abs(hi)) ? range : 0.0;
    }
  }
  return st;
}

Matrix apply_scaler(const ScalerState& st, const Matrix& X) {
  if (X.cols() != st.scale.size()) throw DataError("scaler: feature count differs from fit");
  Matrix out(X.rows(), X.cols());
  for (std::size_t r = 0; r < X.rows(); ++r)
    for (std::size_t j = 0; j < X.cols(); ++j)
      out(r, j) = st.scale[j] == 0.0 ? 0.0 : (X(r, j) - st.offset[j]) / st.scale[j];
  return out;
}

}  // namespace nirs::preproc
