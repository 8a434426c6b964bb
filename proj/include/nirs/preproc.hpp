#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nirs/matrix.hpp"

namespace nirs::preproc {

enum class StepKind {
  none,
  asls,
  savgol,
  gaussian,
  snv,
  emsc,
  haar,
  area_norm,
  osc,
  pca,
  standard_scale,
  minmax_scale,
};

/// Slot a step occupies in a pipeline; a pipeline holds at most one step
/// per slot.
enum class StepCategory { none, baseline, scatter, representation, scaling };

struct StepSpec {
  StepKind kind = StepKind::none;
  int window = 0;       // savgol
  int polyorder = 0;    // savgol
  int deriv = 0;        // savgol
  double lambda = 1e5;  // asls
  double p = 0.001;     // asls
  int iters = 10;       // asls
  double sigma = 2.0;   // gaussian
  int degree = 2;       // emsc
  int n_components = 1; // osc
  double ratio = 0.25;  // pca

  static StepSpec none() { return {}; }
  static StepSpec asls(double lambda = 1e5, double p = 0.001, int iters = 10);
  static StepSpec savgol(int window, int polyorder, int deriv);
  static StepSpec gaussian(double sigma = 2.0);
  static StepSpec snv();
  static StepSpec emsc(int degree = 2);
  static StepSpec haar();
  static StepSpec area_norm();
  static StepSpec osc(int n_components = 1);
  static StepSpec pca(double ratio = 0.25);
  static StepSpec standard_scale();
  static StepSpec minmax_scale();

  StepCategory category() const;
  /// Derivative order this step applies (savgol only).
  int derivative_order() const { return kind == StepKind::savgol ? deriv : 0; }
  bool needs_fit() const;
  void validate() const;
  std::string to_text() const;

  friend bool operator==(const StepSpec& a, const StepSpec& b);
};

StepSpec parse_step(std::string_view text);

/// Ordered preprocessing chain. `none` steps are dropped on construction,
/// so the empty pipeline is the identity and prints as "none".
struct PipelineSpec {
  std::vector<StepSpec> steps;

  PipelineSpec() = default;
  explicit PipelineSpec(std::vector<StepSpec> s);

  /// Canonical compact text, e.g. "savgol(15,2,1)>snv>pca(0.25)".
  std::string to_text() const;
  static PipelineSpec parse(std::string_view text);
  void validate() const;
  bool has_derivative() const;
  /// Steps of `this` followed by steps of `tail`.
  PipelineSpec then(const PipelineSpec& tail) const;

  friend bool operator==(const PipelineSpec&, const PipelineSpec&) = default;
};

// ---- stateless row operators ------------------------------------------------

/// numpy-style "reflect" index (mirror about the edge sample, edge not
/// repeated). Valid for any offset.
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n);
std::vector<double> reflect_pad(std::span<const double> x, std::size_t radius);

std::vector<double> snv(std::span<const double> spectrum);
Matrix snv(const Matrix& X);

/// Correlation weights for the deriv-order derivative at the window centre
/// of the local least-squares polynomial (unit channel spacing).
std::vector<double> savgol_coefficients(int window, int polyorder, int deriv);
Matrix savgol(const Matrix& X, int window, int polyorder, int deriv);

/// Whittaker-type asymmetric least squares baseline for one spectrum.
std::vector<double> asls_fit_baseline(std::span<const double> x, double lambda, double p, int iters);
/// Baseline-corrected spectra x - z.
Matrix asls_baseline(const Matrix& X, double lambda, double p, int iters);

std::vector<double> gaussian_kernel(double sigma);
Matrix gaussian_smooth(const Matrix& X, double sigma);

std::vector<double> area_norm(std::span<const double> spectrum);
Matrix area_norm(const Matrix& X);

std::size_t next_pow2(std::size_t n);
/// Orthonormal Haar decomposition of a power-of-two length signal. Layout:
/// [approximation, coarsest detail, ..., finest details].
std::vector<double> haar_forward(std::span<const double> x);
std::vector<double> haar_inverse(std::span<const double> coeffs);
/// Rows edge-replicated to the next power of two, then decomposed.
Matrix haar_transform(const Matrix& X);

// ---- stateful operators ---------------------------------------------------

struct EmscState {
  std::vector<double> reference;
  int degree = 2;
  Matrix projector;  // (degree + 2) x p least-squares solve for [1, m, t, t^2, ...]
};

EmscState emsc_fit(const Matrix& X_cal, int degree);
EmscState emsc_with_reference(std::span<const double> reference, int degree);
Matrix emsc_apply(const EmscState& state, const Matrix& X);

struct OscState {
  std::vector<double> means;
  Matrix weights;   // n_components x p, unit norm rows
  Matrix loadings;  // n_components x p
  std::vector<bool> converged;
  std::vector<int> iterations;
};

struct OscFit {
  OscState state;
  Matrix deflated;      // calibration after removing every component, means re-added
  Matrix scores;        // n_cal x n_components
};

/// Targets as an n x m matrix (one column for regression, one-hot for
/// classification).
OscFit osc_fit(const Matrix& X_cal, const Matrix& Y_cal, int n_components);
Matrix osc_apply(const OscState& state, const Matrix& X);

struct PcaState {
  std::vector<double> means;
  Matrix components;  // k x p, rows ordered by decreasing variance
  std::vector<double> explained_variance;
};

std::size_t pca_component_count(std::size_t p, std::size_t n_cal, double ratio);
PcaState pca_fit(const Matrix& X_cal, double ratio);
Matrix pca_apply(const PcaState& state, const Matrix& X);

enum class ScalerKind { standard, minmax };

struct ScalerState {
  ScalerKind kind = ScalerKind::standard;
  std::vector<double> offset;  // mean or min
  std::vector<double> scale;   // sd or range; 0 marks a degenerate feature
};

ScalerState fit_scaler(const Matrix& X_cal, ScalerKind kind);
Matrix apply_scaler(const ScalerState& state, const Matrix& X);

// ---- pipelines --------------------------------------------------------------

struct FittedStep {
  StepSpec spec;
  std::variant<std::monostate, EmscState, OscState, PcaState, ScalerState> state;

  Matrix apply(const Matrix& X) const;
  friend bool operator==(const FittedStep&, const FittedStep&);
};

/// Fits one step on calibration rows; `fitted_output` receives the step's
/// output on those rows.
FittedStep fit_step(const StepSpec& spec, const Matrix& X_cal, const Matrix& Y_cal, Matrix& fitted_output);

struct FittedPipeline {
  PipelineSpec spec;
  std::vector<FittedStep> steps;

  Matrix apply(const Matrix& X) const;
  friend bool operator==(const FittedPipeline&, const FittedPipeline&) = default;
};

struct PipelineFit {
  FittedPipeline pipeline;
  Matrix calibration;  // apply(pipeline, X_cal)
};

/// Fits steps in order on calibration data; y-aware steps see only Y_cal.
/// Step failures are rethrown with the step index and text prepended.
PipelineFit fit_pipeline(const PipelineSpec& spec, const Matrix& X_cal, const Matrix& Y_cal);
Matrix apply_pipeline(const FittedPipeline& fp, const Matrix& X);

/// Regression targets as an n x 1 matrix.
Matrix target_column(std::span<const double> y);
/// One-hot n x C matrix for label ids in [0, C).
Matrix one_hot(std::span<const int> labels, int n_classes);

}  // namespace nirs::preproc
