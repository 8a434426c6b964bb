#include <cmath>

#include "nirs/error.hpp"
#include "nirs/preproc.hpp"

namespace nirs::preproc {

namespace {

// Symmetric pentadiagonal system stored by bands: a0[i] = A(i,i),
// a1[i] = A(i,i+1), a2[i] = A(i,i+2). Solved by banded LDL^T.
struct Pentadiagonal {
  std::vector<double> a0, a1, a2;
};

// lambda * D2^T D2, D2 the (n-2) x n second-difference operator.
Pentadiagonal second_difference_penalty(std::size_t n, double lambda) {
  Pentadiagonal m{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const double c[3] = {1.0, -2.0, 1.0};
  for (std::size_t r = 0; r + 2 < n; ++r)
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) {
        const double v = lambda * c[a] * c[b];
        if (b == a) m.a0[r + a] += v;
        else if (b == a + 1) m.a1[r + a] += v;
        else m.a2[r + a] += v;
      }
  return m;
}

std::vector<double> solve_ldlt(const Pentadiagonal& A, std::span<const double> rhs) {
  const std::size_t n = rhs.size();
  std::vector<double> d(n), l1(n, 0.0), l2(n, 0.0);  // l1[i] = L(i+1,i), l2[i] = L(i+2,i)
  for (std::size_t i = 0; i < n; ++i) {
    double di = A.a0[i];
    if (i >= 1) di -= l1[i - 1] * l1[i - 1] * d[i - 1];
    if (i >= 2) di -= l2[i - 2] * l2[i - 2] * d[i - 2];
    if (!(di > 0.0)) throw DegenerateInput("asls system is not positive definite");
    d[i] = di;
    if (i + 1 < n) {
      double v = A.a1[i];
      if (i >= 1) v -= l2[i - 1] * l1[i - 1] * d[i - 1];
      l1[i] = v / di;
    }
    if (i + 2 < n) l2[i] = A.a2[i] / di;
  }
  std::vector<double> z(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 1) z[i] -= l1[i - 1] * z[i - 1];
    if (i >= 2) z[i] -= l2[i - 2] * z[i - 2];
  }
  for (std::size_t i = 0; i < n; ++i) z[i] /= d[i];
  for (std::size_t k = n; k-- > 0;) {
    if (k + 1 < n) z[k] -= l1[k] * z[k + 1];
    if (k + 2 < n) z[k] -= l2[k] * z[k + 2];
  }
  return z;
}

}  // namespace

std::vector<double> asls_fit_baseline(std::span<const double> x, double lambda, double p, int iters) {
  StepSpec::asls(lambda, p, iters).validate();
  const std::size_t n = x.size();
  if (n < 5) throw ParameterError("asls needs at least 5 channels");
  const Pentadiagonal penalty = second_difference_penalty(n, lambda);
  std::vector<double> w(n, 1.0), rhs(n), z;
  for (int it = 0; it < iters; ++it) {
    Pentadiagonal A = penalty;
    for (std::size_t i = 0; i < n; ++i) {
      A.a0[i] += w[i];
      rhs[i] = w[i] * x[i];
    }
    z = solve_ldlt(A, rhs);
    for (std::size_t i = 0; i < n; ++i) w[i] = x[i] > z[i] ? p : 1.0 - p;
  }
  return z;
}

Matrix asls_baseline(const Matrix& X, double lambda, double p, int iters) {
  Matrix out(X.rows(), X.cols());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto x = X.row(r);
    const std::vector<double> z = asls_fit_baseline(x, lambda, p, iters);
    auto o = out.row(r);
    for (std::size_t i = 0; i < x.size(); ++i) o[i] = x[i] - z[i];
  }
  return out;
}

}  // namespace nirs::preproc
