#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nirs/bridge.hpp"
#include "nirs/dataset.hpp"
#include "nirs/manifest.hpp"
#include "nirs/models.hpp"
#include "nirs/preproc.hpp"
#include "nirs/sampling.hpp"

namespace nirs::search {

// ---- search spaces ---------------------------------------------------------

struct SearchSpace {
  SearchFamily family = SearchFamily::linear;
  std::vector<preproc::StepSpec> phase1_baseline;
  std::vector<preproc::StepSpec> phase1_scatter;
  std::vector<preproc::StepSpec> phase2_repr;
  std::vector<preproc::StepSpec> phase2_scale;  // linear only
  int top_k = 3;

  static SearchSpace linear();
  static SearchSpace tabular();
  static SearchSpace for_family(SearchFamily f);
};

/// Baseline-major product of baseline and scatter options, `none` first.
std::vector<preproc::PipelineSpec> enumerate_phase1(const SearchSpace& space);

/// Each retained pipeline crossed with the representation (and scaling)
/// options, in retention order.
std::vector<preproc::PipelineSpec> expand_phase2(const std::vector<preproc::PipelineSpec>& top,
                                                 const SearchSpace& space);

/// Counts implied by a space: phase-1 and phase-2 pipelines, pipeline-fold
/// fits and model fit operations for `configs` hyperparameter settings.
struct SearchCounts {
  std::size_t phase1_pipelines = 0;
  std::size_t phase2_pipelines = 0;
  std::size_t cached_pipelines = 0;  // phase-2 entries scored from the phase-1 cache
  int folds = 0;
  int configs_per_pipeline = 0;

  std::size_t total_pipelines() const { return phase1_pipelines + phase2_pipelines; }
  std::size_t pipeline_fold_fits() const { return total_pipelines() * static_cast<std::size_t>(folds); }
  std::size_t fit_operations() const { return pipeline_fold_fits() * static_cast<std::size_t>(configs_per_pipeline); }
};

SearchCounts planned_counts(const SearchSpace& space, int folds, int configs_per_pipeline);

/// Text listing for the CLI: every phase-1 pipeline on its own line and a
/// phase-2 template line.
std::string list_pipelines(SearchFamily family);

// ---- TPE -------------------------------------------------------------------

struct TpeConfig {
  double gamma = 0.25;
  int n_startup = 10;
  int n_candidates = 24;
  double lower = -6.0;  // log10 bounds
  double upper = 6.0;
  double fallback_bandwidth = 0.5;
};

struct TpeObservation {
  double x = 0.0;     // log10 alpha
  double loss = 0.0;  // lower is better
};

/// Next point in log space. Startup trials are a seeded low-discrepancy
/// sequence; later trials maximise l(x)/g(x) over candidates drawn from l.
/// Deterministic in (history, seed, trial_index).
double tpe_suggest(const std::vector<TpeObservation>& history, const TpeConfig& cfg, std::uint64_t seed,
                   int trial_index);

/// Gaussian-mixture density with Silverman bandwidth; exposed for tests.
struct ParzenDensity {
  std::vector<double> centers;
  double bandwidth = 0.5;

  static ParzenDensity fit(std::vector<double> points, double fallback_bandwidth);
  double log_pdf(double x) const;
};

/// Portable deterministic generators (independent of the standard
/// library's distribution implementations).
double uniform01(std::mt19937_64& rng);
double standard_normal(std::mt19937_64& rng);

/// FNV-1a, stable across platforms; used to derive per-pipeline seeds.
std::uint64_t stable_hash(std::string_view text, std::uint64_t seed = 0);

// ---- evaluation ------------------------------------------------------------

/// Calibration rows only. Built from the split's train indices.
struct CalibrationSet {
  Task task = Task::regression;
  Matrix X;
  std::vector<double> y;   // regression targets (or label ids widened)
  std::vector<int> labels; // classification
  int n_classes = 0;

  std::size_t n() const { return X.rows(); }
  /// Response matrix handed to y-aware preprocessing.
  Matrix response() const;
  CalibrationSet subset(std::span<const std::size_t> rows) const;
};

CalibrationSet calibration_set(const Dataset& ds, std::span<const std::size_t> train_rows);

/// Test rows behind an audited accessor: every read is logged, so tests can
/// assert that a (dataset, model) search touched the test set exactly once.
class TestSetAccess {
 public:
  TestSetAccess(const Dataset& ds, std::vector<std::size_t> test_rows);

  struct View {
    Matrix X;
    std::vector<double> y;
    std::vector<int> labels;
  };
  View read(const std::string& purpose);
  int reads() const { return static_cast<int>(log_.size()); }
  const std::vector<std::string>& log() const { return log_; }
  std::size_t size() const { return rows_.size(); }

 private:
  const Dataset* ds_;
  std::vector<std::size_t> rows_;
  std::vector<std::string> log_;
};

struct ModelSetup {
  std::string id;
  models::PredictorKind kind = models::PredictorKind::pls;
  ExternalModelConfig external;
};

/// Resolves a manifest model id for a task. `pls` on a classification task
/// runs PLS-DA. Returns nullopt when the model does not apply to the task
/// (ridge on classification).
std::optional<ModelSetup> resolve_model(const std::string& id, Task task,
                                        const std::map<std::string, ExternalModelConfig>& externals);

SearchFamily default_family(models::PredictorKind kind);

/// Adapter processes for one external model, one per worker slot, started
/// on first use and restarted after a fatal error.
class AdapterPool {
 public:
  AdapterPool(std::string model_id, ExternalModelConfig config, int workers);
  bridge::ExternalModel& get(int worker);
  void shutdown_all();
  int spawned() const { return spawned_; }

 private:
  std::string model_id_;
  ExternalModelConfig config_;
  std::vector<std::optional<bridge::ExternalModel>> slots_;
  int spawned_ = 0;
};

struct SearchOptions {
  int folds = 3;
  int workers = 1;
  std::uint64_t seed = 0;
  int top_k = 3;
  int tpe_trials = 30;
  TpeConfig tpe;
  std::optional<SearchFamily> family;  // overrides default_family
};

struct TrialRecord {
  std::string pipeline;
  std::string hyperparams;
  models::PredictorSpec spec;
  std::vector<double> fold_scores;  // RMSE or balanced accuracy per fold
  double mean_score = 0.0;
  double loss = 0.0;  // lower is better: RMSECV or -ACC-CV
  bool failed = false;
  std::string error;
  double wall_ms = 0.0;
};

struct PipelineResult {
  preproc::PipelineSpec pipeline;
  int phase = 1;
  bool cached = false;  // phase-2 duplicate scored from the phase-1 cache
  bool failed = false;
  std::string error;
  std::vector<TrialRecord> trials;
  std::optional<std::size_t> best;  // index into trials

  const TrialRecord* best_trial() const { return best ? &trials[*best] : nullptr; }
};

/// Scores one pipeline across folds with the model's tuning strategy:
/// exhaustive components for PLS, TPE over log10 alpha for ridge, one fixed
/// trial for external models.
PipelineResult evaluate_pipeline(const preproc::PipelineSpec& pipeline, const ModelSetup& model,
                                 const CalibrationSet& cal, const sampling::FoldAssignment& folds,
                                 const SearchOptions& opts, AdapterPool* adapters = nullptr, int worker = 0);

/// Both search phases on the calibration set.
struct SearchResult {
  std::vector<PipelineResult> phase1;
  std::vector<PipelineResult> phase2;
  std::vector<std::size_t> retained;  // indices into phase1
  SearchCounts counts;
  int physical_pipeline_fold_fits = 0;
  std::optional<std::pair<int, std::size_t>> best;  // (phase, index)

  const PipelineResult* best_pipeline() const;
};

SearchResult two_phase_search(const CalibrationSet& cal, const sampling::FoldAssignment& folds,
                              const ModelSetup& model, const SearchSpace& space, const SearchOptions& opts,
                              AdapterPool* adapters = nullptr);

sampling::FoldAssignment make_folds(const CalibrationSet& cal, int k);

struct RobustnessRecord {
  std::optional<int> a95;
  std::optional<double> t2_threshold;
  std::size_t n_out = 0;
  std::size_t n_excluded = 0;
  std::optional<double> rmsep_out;
  std::size_t n_extra = 0;
  std::optional<double> rmsep_extra;
  std::string note;
};

struct FinalResult {
  double test_score = 0.0;  // RMSEP or ACCP
  std::vector<double> predictions;
  bool truncated = false;
  RobustnessRecord robustness;
};

/// Refit on the full calibration set with the selected settings (external
/// models switch to their final fixed parameters) and one read of the test
/// set.
FinalResult finalize(const CalibrationSet& cal, TestSetAccess& test, const ModelSetup& model,
                     const preproc::PipelineSpec& pipeline, const models::PredictorSpec& hyper,
                     AdapterPool* adapters = nullptr);

struct SearchOutcome {
  std::string dataset;
  std::string database;
  std::string model;
  Task task = Task::regression;
  std::string status = "ok";  // ok | failed | unavailable | unsupported
  std::string error;
  std::size_t n_cal = 0;
  std::size_t n_test = 0;
  std::size_t p = 0;
  std::string pipeline;
  std::string hyperparams;
  double cv_score = 0.0;
  double test_score = 0.0;
  bool truncated = false;
  RobustnessRecord robustness;
  SearchResult search;
  std::vector<std::string> test_audit;
  std::vector<int> fold_of;
};

/// Split, fold, two-phase search, refit and single test evaluation for one
/// (dataset, model) cell. Per-cell failures come back as a status.
SearchOutcome run_cell(const Dataset& ds, const std::string& model_id,
                       const std::map<std::string, ExternalModelConfig>& externals, const SearchOptions& opts);

}  // namespace nirs::search
