#include <algorithm>
#include <cmath>

#include "nirs/csv.hpp"
#include "nirs/error.hpp"
#include "nirs/models.hpp"
#include "nirs/preproc.hpp"

namespace nirs::models {

void PredictorSpec::validate() const {
  switch (kind) {
    case PredictorKind::pls:
    case PredictorKind::plsda:
      if (n_components < 1 || n_components > kMaxPlsComponents)
        throw ParameterError("pls components must lie in [1, " + std::to_string(kMaxPlsComponents) + "]");
      break;
    case PredictorKind::ridge:
      if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError("ridge alpha must be > 0");
      break;
    case PredictorKind::external:
      if (model_id.empty()) throw ParameterError("external model needs an id");
      break;
  }
}

std::string PredictorSpec::hyperparams_text() const {
  switch (kind) {
    case PredictorKind::pls:
    case PredictorKind::plsda: return "n_components=" + std::to_string(n_components);
    case PredictorKind::ridge: return "alpha=" + csv::format_double(alpha);
    case PredictorKind::external: return "fixed";
  }
  return {};
}

FittedPredictor::FittedPredictor(PredictorSpec spec, Task task, std::vector<double> x_means,
                                 std::vector<double> y_means, Matrix coefficients, bool truncated,
                                 int used_components)
    : spec_(std::move(spec)),
      task_(task),
      x_means_(std::move(x_means)),
      y_means_(std::move(y_means)),
      coef_(std::move(coefficients)),
      truncated_(truncated),
      used_components_(used_components) {
  if (coef_.rows() != x_means_.size() || coef_.cols() != y_means_.size())
    throw DataError("predictor: coefficient shape disagrees with centring vectors");
}

Matrix FittedPredictor::decision_scores(const Matrix& X) const {
  if (X.cols() != x_means_.size())
    throw DataError("predict: expected " + std::to_string(x_means_.size()) + " features, got " +
                    std::to_string(X.cols()));
  Matrix Xc = X;
  center_rows(Xc, x_means_);
  Matrix out(X.rows(), y_means_.size());
  as_eigen(out) = as_eigen(Xc) * as_eigen(coef_);
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t k = 0; k < out.cols(); ++k) out(r, k) += y_means_[k];
  if (!out.all_finite()) throw DegenerateInput("predict: non-finite output");
  return out;
}

std::vector<double> FittedPredictor::predict(const Matrix& X) const {
  if (task_ == Task::classification) {
    const auto labels = predict_labels(X);
    return {labels.begin(), labels.end()};
  }
  return decision_scores(X).column(0);
}

std::vector<int> FittedPredictor::predict_labels(const Matrix& X) const {
  if (task_ != Task::classification) throw Error("predict_labels on a regression model");
  return argmax_rows(decision_scores(X));
}

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(scores.rows(), 0);
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.cols(); ++c)
      if (scores(r, c) > scores(r, best)) best = c;
    out[r] = static_cast<int>(best);
  }
  return out;
}

FittedPredictor pls_fit(const Matrix& X, std::span<const double> y, int n_components) {
  const PredictorSpec spec = PredictorSpec::pls(n_components);
  spec.validate();
  const PlsModel m = pls_nipals(X, preproc::target_column(y), n_components);
  const int a = m.components();
  return FittedPredictor(spec, Task::regression, m.x_means, m.y_means, m.coefficients(a),
                         m.truncated || a < n_components, a);
}

FittedPredictor plsda_fit(const Matrix& X, std::span<const int> labels, int n_classes, int n_components) {
  const PredictorSpec spec = PredictorSpec::plsda(n_components);
  spec.validate();
  if (n_classes < 2) throw DegenerateInput("pls-da needs at least 2 classes");
  std::vector<char> seen(static_cast<std::size_t>(n_classes), 0);
  for (int l : labels) {
    if (l < 0 || l >= n_classes) throw DataError("label id out of range");
    seen[static_cast<std::size_t>(l)] = 1;
  }
  if (std::count(seen.begin(), seen.end(), 1) < 2) throw DegenerateInput("pls-da: single class in calibration");
  const PlsModel m = pls_nipals(X, preproc::one_hot(labels, n_classes), n_components);
  const int a = m.components();
  return FittedPredictor(spec, Task::classification, m.x_means, m.y_means, m.coefficients(a),
                         m.truncated || a < n_components, a);
}

FittedPredictor ridge_fit(const Matrix& X, std::span<const double> y, double alpha, bool fit_intercept) {
  const PredictorSpec spec = PredictorSpec::ridge(alpha);
  spec.validate();
  RidgeModel m = ridge_solve(X, y, alpha, fit_intercept);
  Matrix coef(m.beta.size(), 1);
  for (std::size_t i = 0; i < m.beta.size(); ++i) coef(i, 0) = m.beta[i];
  return FittedPredictor(spec, Task::regression, std::move(m.x_means), {m.y_mean}, std::move(coef), false, 0);
}

}  // namespace nirs::models
