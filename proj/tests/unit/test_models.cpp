#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "nirs/error.hpp"
#include "nirs/models.hpp"
#include "nirs/preproc.hpp"
#include "oracles.hpp"

using namespace nirs;
using namespace nirs::models;

TEST_CASE("pls with every component equals least squares") {
  const Matrix X = testing::random_matrix(25, 6, 1);
  const auto y = testing::random_vector(25, 2);
  const auto ols = oracle::ols_with_intercept(X, y);
  const FittedPredictor f = pls_fit(X, y, 6);
  for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(f.coefficients()(j, 0) - ols(static_cast<Eigen::Index>(j) + 1)) <= 1e-6);
  const Matrix Q = testing::random_matrix(4, 6, 3);
  const auto pred = f.predict(Q);
  for (std::size_t i = 0; i < 4; ++i) {
    double v = ols(0);
    for (std::size_t j = 0; j < 6; ++j) v += ols(static_cast<Eigen::Index>(j) + 1) * Q(i, j);
    CHECK(std::abs(pred[i] - v) <= 1e-6);
  }
}

TEST_CASE("pls scores and weights are orthogonal") {
  const Matrix X = testing::random_matrix(30, 12, 4);
  const auto y = testing::random_vector(30, 5);
  const PlsModel m = pls_nipals(X, preproc::target_column(y), 6);
  REQUIRE(m.components() == 6);
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b) {
      const auto ta = m.scores.column(static_cast<std::size_t>(a));
      const auto tb = m.scores.column(static_cast<std::size_t>(b));
      double s = 0, na = 0, nb = 0;
      for (std::size_t i = 0; i < ta.size(); ++i) {
        s += ta[i] * tb[i];
        na += ta[i] * ta[i];
        nb += tb[i] * tb[i];
      }
      CHECK(std::abs(s) / std::sqrt(na * nb) <= 1e-8);
      double w = 0;
      for (std::size_t j = 0; j < 12; ++j) w += m.weights(static_cast<std::size_t>(a), j) * m.weights(static_cast<std::size_t>(b), j);
      CHECK(std::abs(w) <= 1e-8);
    }
}

TEST_CASE("pls prediction path agrees with per-prefix coefficients") {
  const Matrix X = testing::random_matrix(20, 8, 6);
  const auto y = testing::random_vector(20, 7);
  const PlsModel m = pls_nipals(X, preproc::target_column(y), 5);
  const Matrix Q = testing::random_matrix(3, 8, 8);
  const auto path = m.predict_path(Q);
  REQUIRE(path.size() == 5);
  for (int a = 1; a <= 5; ++a) {
    const Matrix B = m.coefficients(a);
    for (std::size_t i = 0; i < 3; ++i) {
      double v = m.y_means[0];
      for (std::size_t j = 0; j < 8; ++j) v += (Q(i, j) - m.x_means[j]) * B(j, 0);
      CHECK(std::abs(path[static_cast<std::size_t>(a - 1)](i, 0) - v) <= 1e-9);
    }
  }
}

TEST_CASE("pls component cap and truncation") {
  const Matrix X = testing::random_matrix(6, 20, 1);
  const auto y = testing::random_vector(6, 2);
  const FittedPredictor f = pls_fit(X, y, 10);
  CHECK(f.used_components() == 5);  // n - 1
  CHECK(f.truncated());
  // Rank-one X exhausts covariance after one component.
  Matrix R(10, 4);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 4; ++j) R(i, j) = static_cast<double>(i) * static_cast<double>(j + 1);
  const PlsModel m = pls_nipals(R, preproc::target_column(testing::random_vector(10, 3)), 3);
  CHECK(m.components() == 1);
  CHECK(m.truncated);
  CHECK_THROWS_AS(pls_nipals(Matrix(5, 3, 1.0), preproc::target_column(testing::random_vector(5, 1)), 2),
                  DegenerateInput);
}

TEST_CASE("ridge closed form on a one-feature fixture") {
  const Matrix X = Matrix::from_rows({{1}, {2}});
  const std::vector<double> y{1, 2};
  const RidgeModel m = ridge_solve(X, y, 1.0, false);
  CHECK(std::abs(m.beta[0] - 5.0 / 6.0) <= 1e-12);
}

TEST_CASE("ridge primal, dual and path agree") {
  for (auto [n, p] : {std::pair<std::size_t, std::size_t>{30, 8}, {10, 40}}) {
    const Matrix X = testing::random_matrix(n, p, n + p);
    const auto y = testing::random_vector(n, 3);
    const RidgePath path(X, y);
    const Matrix Q = testing::random_matrix(5, p, 99);
    const Matrix Z = path.project(Q);
    for (double alpha : {1e-3, 0.5, 20.0}) {
      const FittedPredictor f = ridge_fit(X, y, alpha);
      const auto a = f.predict(Q);
      const auto b = path.predict(Z, alpha);
      for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-8 * (1.0 + std::abs(a[i])));
      const auto beta = path.coefficients(alpha);
      for (std::size_t j = 0; j < p; ++j) CHECK(std::abs(beta[j] - f.coefficients()(j, 0)) <= 1e-8);
    }
  }
}

TEST_CASE("ridge solution is a stationary point of the penalised loss") {
  const Matrix X = testing::random_matrix(15, 5, 2);
  const auto y = testing::random_vector(15, 3);
  const double alpha = 0.7;
  const RidgeModel m = ridge_solve(X, y, alpha);
  auto loss = [&](const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < 15; ++i) {
      double r = y[i] - m.y_mean;
      for (std::size_t j = 0; j < 5; ++j) r -= (X(i, j) - m.x_means[j]) * b[j];
      s += r * r;
    }
    for (double v : b) s += alpha * v * v;
    return s;
  };
  const double h = 1e-5;
  const double scale = loss(m.beta);
  for (std::size_t j = 0; j < 5; ++j) {
    auto up = m.beta, dn = m.beta;
    up[j] += h;
    dn[j] -= h;
    CHECK(std::abs((loss(up) - loss(dn)) / (2 * h)) <= 1e-6 * std::max(1.0, scale));
  }
  CHECK_THROWS_AS(ridge_solve(X, y, 0.0), ParameterError);
}

TEST_CASE("pls-da separates well separated classes") {
  const Dataset ds = testing::class_dataset("c", 10, 20, 3, 4);
  const FittedPredictor f = plsda_fit(ds.X.values(), ds.y.labels, 3, 3);
  const auto pred = f.predict_labels(ds.X.values());
  CHECK(pred == ds.y.labels);
  CHECK(f.decision_scores(ds.X.values()).cols() == 3);
  const std::vector<int> one(30, 0);
  CHECK_THROWS_AS(plsda_fit(ds.X.values(), one, 3, 2), DegenerateInput);
}

TEST_CASE("predictor contract") {
  const Matrix X = testing::random_matrix(10, 4, 1);
  const FittedPredictor f = pls_fit(X, testing::random_vector(10, 2), 2);
  CHECK_THROWS_AS(f.predict(testing::random_matrix(2, 5, 3)), DataError);
  CHECK(PredictorSpec::pls(3).hyperparams_text() == "n_components=3");
  CHECK(PredictorSpec::ridge(0.01).hyperparams_text() == "alpha=0.01");
  CHECK(PredictorSpec::external("tabpfn").hyperparams_text() == "fixed");
  CHECK_THROWS_AS(PredictorSpec::pls(31).validate(), ParameterError);
  CHECK(argmax_rows(Matrix::from_rows({{0.2, 0.2, 0.1}, {0, 1, 0}})) == std::vector<int>{0, 1});
}
