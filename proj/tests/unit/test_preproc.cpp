#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "nirs/error.hpp"
#include "nirs/preproc.hpp"
#include "oracles.hpp"

using namespace nirs;
using namespace nirs::preproc;

TEST_CASE("step and pipeline text round trip") {
  const PipelineSpec p({StepSpec::savgol(11, 2, 1), StepSpec::snv(), StepSpec::osc(1), StepSpec::minmax_scale()});
  const std::string text = p.to_text();
  CHECK(PipelineSpec::parse(text) == p);
  const PipelineSpec q({StepSpec::asls(), StepSpec::emsc(2), StepSpec::pca(0.5)});
  CHECK(PipelineSpec::parse(q.to_text()) == q);
  CHECK_THROWS_AS(PipelineSpec({StepSpec::asls(), StepSpec::savgol(11, 2, 1)}).validate(), ParameterError);
  CHECK(p.has_derivative());
  CHECK_FALSE(PipelineSpec({StepSpec::snv()}).has_derivative());
  CHECK(PipelineSpec::parse("none").steps.empty());
  CHECK(PipelineSpec({StepSpec::none(), StepSpec::snv()}) == PipelineSpec({StepSpec::snv()}));
  CHECK_THROWS_AS(PipelineSpec::parse("wavelet(3)"), ParameterError);
  CHECK_THROWS_AS(StepSpec::savgol(10, 2, 1).validate(), ParameterError);  // even window
  CHECK_THROWS_AS(StepSpec::savgol(5, 2, 3).validate(), ParameterError);   // deriv > polyorder
  CHECK_THROWS_AS(StepSpec::asls(1e5, 1.5, 10).validate(), ParameterError);
}

TEST_CASE("savgol coefficients equal the least-squares projection") {
  const auto c = savgol_coefficients(5, 2, 0);
  const double expect[5] = {-3, 12, 17, 12, -3};
  for (int i = 0; i < 5; ++i) CHECK(std::abs(c[static_cast<std::size_t>(i)] - expect[i] / 35.0) <= 1e-12);
  // First-derivative kernel for (5, 2): (-2, -1, 0, 1, 2) / 10.
  const auto d = savgol_coefficients(5, 2, 1);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(d[static_cast<std::size_t>(i)] - (i - 2) / 10.0) <= 1e-12);
}

TEST_CASE("savgol reproduces polynomials in the interior") {
  const std::size_t p = 40;
  Matrix X(1, p);
  for (std::size_t j = 0; j < p; ++j) {
    const double t = static_cast<double>(j);
    X(0, j) = 0.3 - 0.2 * t + 0.05 * t * t;
  }
  const Matrix s0 = savgol(X, 11, 2, 0);
  const Matrix s1 = savgol(X, 11, 2, 1);
  const Matrix s2 = savgol(X, 11, 2, 2);
  for (std::size_t j = 5; j + 5 < p; ++j) {
    const double t = static_cast<double>(j);
    CHECK(std::abs(s0(0, j) - X(0, j)) <= 1e-10);
    CHECK(std::abs(s1(0, j) - (-0.2 + 0.1 * t)) <= 1e-10);
    CHECK(std::abs(s2(0, j) - 0.1) <= 1e-10);
  }
  CHECK_THROWS_AS(savgol(Matrix(1, 5, 1.0), 11, 2, 1), ParameterError);
}

TEST_CASE("reflect padding") {
  CHECK(reflect_index(-1, 5) == 1);
  CHECK(reflect_index(-2, 5) == 2);
  CHECK(reflect_index(5, 5) == 3);
  CHECK(reflect_index(6, 5) == 2);
  const std::vector<double> x{1, 2, 3};
  CHECK(reflect_pad(x, 2) == std::vector<double>{3, 2, 1, 2, 3, 2, 1});
}

TEST_CASE("snv") {
  const std::vector<double> x{1, 2, 3, 4};
  const auto s = snv(x);
  double m = 0, v = 0;
  for (double e : s) m += e;
  for (double e : s) v += e * e;
  CHECK(std::abs(m) <= 1e-12);
  CHECK(std::abs(v / 3.0 - 1.0) <= 1e-12);  // sample standard deviation
  // Affine invariance.
  std::vector<double> y;
  for (double e : x) y.push_back(3.0 + 2.5 * e);
  CHECK(testing::max_abs_diff(snv(y), s) <= 1e-12);
  CHECK_THROWS_AS(snv(std::vector<double>{2, 2, 2}), DegenerateInput);
}

TEST_CASE("haar transform is orthonormal") {
  const auto x = testing::random_vector(32, 4);
  const auto c = haar_forward(x);
  CHECK(testing::max_abs_diff(haar_inverse(c), x) <= 1e-12);
  double ex = 0, ec = 0;
  for (double v : x) ex += v * v;
  for (double v : c) ec += v * v;
  CHECK(std::abs(ex - ec) <= 1e-9);
  CHECK_THROWS_AS(haar_forward(std::vector<double>(6, 1.0)), ParameterError);
  // Non power-of-two rows are edge-padded.
  const Matrix h = haar_transform(testing::random_matrix(3, 20, 5));
  CHECK(h.cols() == 32);
  CHECK(next_pow2(33) == 64);
  CHECK(next_pow2(32) == 32);
}

TEST_CASE("area normalisation") {
  const auto a = area_norm(std::vector<double>{1, -1, 2});
  CHECK(a == std::vector<double>{0.25, -0.25, 0.5});
  CHECK_THROWS_AS(area_norm(std::vector<double>{0, 0}), DegenerateInput);
}

TEST_CASE("emsc removes offset, slope and scale") {
  const std::size_t p = 50;
  const auto m = testing::random_vector(p, 8, 0.5, 2.0);
  const EmscState st = emsc_with_reference(m, 2);
  Matrix X(3, p);
  const double a[3] = {0.1, -0.4, 2.0}, b[3] = {0.7, 1.3, 2.2}, c1[3] = {0.05, -0.2, 0.3}, c2[3] = {0.1, 0.0, -0.5};
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t i = 0; i < p; ++i) {
      const double t = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(p - 1);
      X(r, i) = a[r] + b[r] * m[i] + c1[r] * t + c2[r] * t * t;
    }
  const Matrix Y = emsc_apply(st, X);
  for (std::size_t r = 0; r < 3; ++r) CHECK(testing::max_abs_diff(Y.row(r), m) <= 1e-10);
}

TEST_CASE("asls baseline matches a dense solve") {
  const std::size_t n = 50;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    x[i] = 0.01 * t + std::exp(-0.5 * std::pow((t - 25.0) / 2.0, 2));
  }
  const double lambda = 1e3, p = 0.01;
  const int iters = 10;
  const auto z = oracle::asls_dense(x, lambda, p, iters);
  const auto got = asls_fit_baseline(x, lambda, p, iters);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - z[i]) <= 1e-6);
}

TEST_CASE("osc scores are uncorrelated with the target") {
  const Matrix X = testing::random_matrix(30, 12, 3);
  const auto y = testing::random_vector(30, 9);
  const OscFit fit = osc_fit(X, target_column(y), 2);
  for (std::size_t a = 0; a < 2; ++a) {
    const auto t = fit.scores.column(a);
    const double tm = mean(t), ym = mean(y);
    double sty = 0, stt = 0, syy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      sty += (t[i] - tm) * (y[i] - ym);
      stt += (t[i] - tm) * (t[i] - tm);
      syy += (y[i] - ym) * (y[i] - ym);
    }
    CHECK(std::abs(sty / std::sqrt(stt * syy)) <= 1e-6);
  }
  // Applying the fitted state to the calibration rows reproduces the deflation.
  CHECK(testing::max_abs_diff(osc_apply(fit.state, X), fit.deflated) <= 1e-10);
  CHECK_THROWS_AS(osc_fit(X, target_column(std::vector<double>(30, 1.0)), 1), DegenerateInput);
}

TEST_CASE("pca component count and projection") {
  CHECK(pca_component_count(100, 50, 0.25) == 25);
  CHECK(pca_component_count(100, 10, 0.25) == 9);
  const Matrix X = testing::random_matrix(20, 8, 6);
  const PcaState st = pca_fit(X, 0.25);
  CHECK(st.components.rows() == pca_component_count(8, 20, 0.25));
  const Matrix Z = pca_apply(st, X);
  CHECK(Z.rows() == 20);
  CHECK(Z.cols() == st.components.rows());
  for (std::size_t i = 1; i < st.explained_variance.size(); ++i)
    CHECK(st.explained_variance[i] <= st.explained_variance[i - 1] + 1e-12);
}

TEST_CASE("scalers use calibration statistics") {
  const Matrix X = Matrix::from_rows({{1, 5}, {3, 5}, {5, 5}});
  const ScalerState s = fit_scaler(X, ScalerKind::minmax);
  const Matrix Y = apply_scaler(s, Matrix::from_rows({{3, 5}, {9, 7}}));
  CHECK(Y(0, 0) == 0.5);
  CHECK(Y(1, 0) == 2.0);
  CHECK(Y(0, 1) == 0.0);  // constant feature maps to zero
  const ScalerState z = fit_scaler(X, ScalerKind::standard);
  CHECK(z.offset[0] == 3.0);
}

TEST_CASE("stateful steps never look at the rows they are applied to") {
  const Matrix cal = testing::random_matrix(25, 16, 1, 0.5, 1.5);
  const auto y = testing::random_vector(25, 2);
  const Matrix Yc = target_column(y);
  Matrix test = testing::random_matrix(6, 16, 3, 0.5, 1.5);
  for (const auto& spec : {StepSpec::emsc(2), StepSpec::osc(1), StepSpec::pca(0.25), StepSpec::standard_scale(),
                           StepSpec::minmax_scale()}) {
    CAPTURE(spec.to_text());
    const PipelineFit fit = fit_pipeline(PipelineSpec({spec}), cal, Yc);
    const Matrix before = fit.pipeline.apply(test);
    // Mutating other query rows leaves each row's output unchanged.
    Matrix mutated = test;
    for (std::size_t j = 0; j < mutated.cols(); ++j) mutated(5, j) += 10.0;
    const Matrix after = fit.pipeline.apply(mutated);
    for (std::size_t r = 0; r < 5; ++r) CHECK(testing::max_abs_diff(before.row(r), after.row(r)) == 0.0);
    // Refitting on the same calibration gives the same state.
    CHECK(fit_pipeline(PipelineSpec({spec}), cal, Yc).pipeline == fit.pipeline);
  }
}

TEST_CASE("pipeline errors name the failing step") {
  Matrix X = testing::random_matrix(5, 8, 1);
  for (std::size_t j = 0; j < 8; ++j) X(2, j) = 1.0;
  try {
    fit_pipeline(PipelineSpec({StepSpec::gaussian(1.0), StepSpec::snv()}), X, target_column(testing::random_vector(5, 1)));
    FAIL("expected DegenerateInput");
  } catch (const DegenerateInput& e) {
    CHECK(std::string(e.what()).find("step 1 (snv)") != std::string::npos);
  }
}
