#include "nirs/error.hpp"
#include "nirs/preproc.hpp"

namespace nirs::preproc {

namespace {

bool same(const Matrix& a, const Matrix& b) { return a == b; }

bool same_state(const std::monostate&, const std::monostate&) { return true; }
bool same_state(const EmscState& a, const EmscState& b) {
  return a.reference == b.reference && a.degree == b.degree && same(a.projector, b.projector);
}
bool same_state(const OscState& a, const OscState& b) {
  return a.means == b.means && same(a.weights, b.weights) && same(a.loadings, b.loadings);
}
bool same_state(const PcaState& a, const PcaState& b) {
  return a.means == b.means && same(a.components, b.components) && a.explained_variance == b.explained_variance;
}
bool same_state(const ScalerState& a, const ScalerState& b) {
  return a.kind == b.kind && a.offset == b.offset && a.scale == b.scale;
}

Matrix apply_stateless(const StepSpec& s, const Matrix& X) {
  switch (s.kind) {
    case StepKind::none: return X;
    case StepKind::asls: return asls_baseline(X, s.lambda, s.p, s.iters);
    case StepKind::savgol: return savgol(X, s.window, s.polyorder, s.deriv);
    case StepKind::gaussian: return gaussian_smooth(X, s.sigma);
    case StepKind::snv: return snv(X);
    case StepKind::haar: return haar_transform(X);
    case StepKind::area_norm: return area_norm(X);
    default: throw Error("step '" + s.to_text() + "' needs fitted state");
  }
}

// Rethrows a library error with context, keeping its dynamic type.
[[noreturn]] void rethrow_with(const std::string& prefix) {
  try {
    throw;
  } catch (const DegenerateInput& e) {
    throw DegenerateInput(prefix + e.what());
  } catch (const ParameterError& e) {
    throw ParameterError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

}  // namespace

bool operator==(const FittedStep& a, const FittedStep& b) {
  if (!(a.spec == b.spec) || a.state.index() != b.state.index()) return false;
  return std::visit(
      [&](const auto& sa) {
        using T = std::decay_t<decltype(sa)>;
        return same_state(sa, std::get<T>(b.state));
      },
      a.state);
}

Matrix FittedStep::apply(const Matrix& X) const {
  return std::visit(
      [&](const auto& st) -> Matrix {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, std::monostate>) return apply_stateless(spec, X);
        else if constexpr (std::is_same_v<T, EmscState>) return emsc_apply(st, X);
        else if constexpr (std::is_same_v<T, OscState>) return osc_apply(st, X);
        else if constexpr (std::is_same_v<T, PcaState>) return pca_apply(st, X);
        else return apply_scaler(st, X);
      },
      state);
}

FittedStep fit_step(const StepSpec& spec, const Matrix& X_cal, const Matrix& Y_cal, Matrix& fitted_output) {
  spec.validate();
  FittedStep fs;
  fs.spec = spec;
  switch (spec.kind) {
    case StepKind::emsc: {
      EmscState st = emsc_fit(X_cal, spec.degree);
      fitted_output = emsc_apply(st, X_cal);
      fs.state = std::move(st);
      break;
    }
    case StepKind::osc: {
      OscFit fit = osc_fit(X_cal, Y_cal, spec.n_components);
      fitted_output = std::move(fit.deflated);
      fs.state = std::move(fit.state);
      break;
    }
    case StepKind::pca: {
      PcaState st = pca_fit(X_cal, spec.ratio);
      fitted_output = pca_apply(st, X_cal);
      fs.state = std::move(st);
      break;
    }
    case StepKind::standard_scale:
    case StepKind::minmax_scale: {
      ScalerState st =
          fit_scaler(X_cal, spec.kind == StepKind::standard_scale ? ScalerKind::standard : ScalerKind::minmax);
      fitted_output = apply_scaler(st, X_cal);
      fs.state = std::move(st);
      break;
    }
    default:
      fitted_output = apply_stateless(spec, X_cal);
  }
  if (!fitted_output.all_finite()) throw DegenerateInput("step produced non-finite values");
  return fs;
}

Matrix FittedPipeline::apply(const Matrix& X) const {
  Matrix cur = X;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    try {
      cur = steps[i].apply(cur);
    } catch (const Error&) {
      rethrow_with("step " + std::to_string(i) + " (" + steps[i].spec.to_text() + "): ");
    }
    if (!cur.all_finite())
      throw DegenerateInput("step " + std::to_string(i) + " (" + steps[i].spec.to_text() +
                            "): non-finite output");
  }
  return cur;
}

PipelineFit fit_pipeline(const PipelineSpec& spec, const Matrix& X_cal, const Matrix& Y_cal) {
  spec.validate();
  PipelineFit out;
  out.pipeline.spec = spec;
  Matrix cur = X_cal;
  for (std::size_t i = 0; i < spec.steps.size(); ++i) {
    Matrix next;
    try {
      out.pipeline.steps.push_back(fit_step(spec.steps[i], cur, Y_cal, next));
    } catch (const Error&) {
      rethrow_with("step " + std::to_string(i) + " (" + spec.steps[i].to_text() + "): ");
    }
    cur = std::move(next);
  }
  out.calibration = std::move(cur);
  return out;
}

Matrix apply_pipeline(const FittedPipeline& fp, const Matrix& X) { return fp.apply(X); }

Matrix target_column(std::span<const double> y) {
  Matrix m(y.size(), 1);
  for (std::size_t i = 0; i < y.size(); ++i) m(i, 0) = y[i];
  return m;
}

Matrix one_hot(std::span<const int> labels, int n_classes) {
  Matrix m(labels.size(), static_cast<std::size_t>(n_classes), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) throw DataError("label id out of range");
    m(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  return m;
}

}  // namespace nirs::preproc
