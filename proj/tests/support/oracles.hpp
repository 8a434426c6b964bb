#pragma once

// Independent reference implementations used by unit and acceptance tests.
// Each is a direct, slow transcription of the defining formula.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "nirs/matrix.hpp"

namespace nirs::oracle {

/// Greedy max-min selection on the normalised joint distance, recomputing
/// every distance from scratch.
inline std::vector<std::size_t> spxy(const Matrix& X, const std::vector<double>& y, std::size_t m) {
  const std::size_t n = X.rows();
  auto dx = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t c = 0; c < X.cols(); ++c) s += (X(i, c) - X(j, c)) * (X(i, c) - X(j, c));
    return std::sqrt(s);
  };
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      mx = std::max(mx, dx(i, j));
      if (!y.empty()) my = std::max(my, std::abs(y[i] - y[j]));
    }
  auto d = [&](std::size_t i, std::size_t j) {
    double v = mx > 0 ? dx(i, j) / mx : 0.0;
    if (!y.empty() && my > 0) v += std::abs(y[i] - y[j]) / my;
    return v;
  };
  double best = -1;
  std::size_t a = 0, b = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (d(i, j) > best) {
        best = d(i, j);
        a = i;
        b = j;
      }
  std::vector<std::size_t> sel{a, b};
  while (sel.size() < m) {
    double far = -1;
    std::size_t pick = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::find(sel.begin(), sel.end(), i) != sel.end()) continue;
      double md = 1e300;
      for (std::size_t s : sel) md = std::min(md, d(i, s));
      if (md > far) {
        far = md;
        pick = i;
      }
    }
    sel.push_back(pick);
  }
  return sel;
}

/// Least squares with an intercept; element 0 is the intercept.
inline Eigen::VectorXd ols_with_intercept(const Matrix& X, const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(X.rows());
  const auto p = static_cast<Eigen::Index>(X.cols());
  Eigen::MatrixXd A(n, p + 1);
  A.col(0).setOnes();
  A.rightCols(p) = as_eigen(X);
  const Eigen::Map<const Eigen::VectorXd> Y(y.data(), n);
  return A.colPivHouseholderQr().solve(Y);
}

/// Asymmetric least squares baseline via dense LU solves of (W + lambda D'D) z = W x.
inline std::vector<double> asls_dense(const std::vector<double>& x, double lambda, double p, int iters) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n - 2, n);
  for (Eigen::Index r = 0; r + 2 < n; ++r) {
    D(r, r) = 1;
    D(r, r + 1) = -2;
    D(r, r + 2) = 1;
  }
  const Eigen::MatrixXd H = lambda * D.transpose() * D;
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n), z;
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
  for (int it = 0; it < iters; ++it) {
    Eigen::MatrixXd A = H;
    A.diagonal() += w;
    z = A.fullPivLu().solve(w.cwiseProduct(xv));
    for (Eigen::Index i = 0; i < n; ++i) w[i] = x[static_cast<std::size_t>(i)] > z[i] ? p : 1 - p;
  }
  return {z.data(), z.data() + n};
}

/// Friedman chi-square from the rank-variance form 12B/(k(k+1)) sum (R_j - (k+1)/2)^2.
inline double friedman_rank_variance(const Matrix& ranks) {
  const std::size_t B = ranks.rows(), k = ranks.cols();
  double ss = 0;
  for (std::size_t j = 0; j < k; ++j) {
    double rj = 0;
    for (std::size_t b = 0; b < B; ++b) rj += ranks(b, j);
    rj /= static_cast<double>(B);
    ss += (rj - (k + 1) / 2.0) * (rj - (k + 1) / 2.0);
  }
  return 12.0 * static_cast<double>(B) / (static_cast<double>(k) * (k + 1)) * ss;
}

/// Pearson correlation.
inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace nirs::oracle
