#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nirs/dataset.hpp"
#include "nirs/search.hpp"
#include "nirs/stats.hpp"

namespace nirs::bench {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kConfigError = 1, kPartialFailure = 2, kFatal = 3 };

/// temp file + rename in the same directory.
void write_atomic(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

/// Persisted per-(dataset, model) result; the unit of resume.
struct TrialRow {
  int phase = 1;
  bool cached = false;
  std::string pipeline;
  std::string hyperparams;
  std::vector<double> fold_scores;
  double mean_score = 0.0;
  bool failed = false;
  std::string error;
  double wall_ms = 0.0;
};

struct CellRecord {
  std::string dataset;
  std::string database;
  Task task = Task::regression;
  std::string model;
  std::string status;
  std::string error;
  std::size_t n_cal = 0;
  std::size_t n_test = 0;
  std::size_t p = 0;
  std::string pipeline;
  std::string hyperparams;
  double cv_score = 0.0;
  double test_score = 0.0;
  bool truncated = false;
  search::RobustnessRecord robustness;
  search::SearchCounts counts;
  int physical_pipeline_fold_fits = 0;
  std::vector<std::string> retained;
  int test_evaluations = 0;
  std::vector<std::string> test_audit;
  std::string started_at;
  std::string finished_at;
  double wall_ms = 0.0;
  std::vector<TrialRow> trials;

  std::size_t n() const { return n_cal + n_test; }
  bool ok() const { return status == "ok"; }
};

CellRecord to_record(const search::SearchOutcome& oc);
nlohmann::json to_json(const CellRecord& c);
CellRecord cell_from_json(const nlohmann::json& j);

std::string cell_file_name(const std::string& dataset, const std::string& model);

struct RunOptions {
  fs::path config;
  fs::path out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> models;  // empty: manifest models
  std::string datasets_glob;        // empty: all
  bool resume = false;
  std::optional<std::string> reference;
};

struct RunSummary {
  int cells = 0;
  int computed = 0;
  int resumed = 0;
  int ok = 0;
  int failed = 0;
  int unavailable = 0;
  int unsupported = 0;
  int exit_code = kOk;
};

/// Executes every selected (dataset, model) cell, persists each under
/// OUT/cells, then writes the report artifacts. Throws ConfigError for
/// manifest problems.
RunSummary run(const RunOptions& opts, std::ostream& log);

struct ReportOptions {
  fs::path run_dir;
  std::optional<std::string> reference;
  bool exact_friedman = false;
};

/// Rebuilds every derived artifact from OUT/cells.
void report(const ReportOptions& opts, std::ostream& log);

// Pieces of the report, exposed for tests.

std::vector<CellRecord> load_cells(const fs::path& run_dir);

/// Reference model per task: explicit choice, else pls (regression) and
/// plsda or pls (classification) when present.
std::optional<std::string> reference_model(const std::vector<CellRecord>& cells, Task task,
                                           const std::optional<std::string>& requested);

std::string results_csv(const std::vector<CellRecord>& cells, const std::optional<std::string>& reference);
std::string trials_csv(const std::vector<CellRecord>& cells);
std::string robustness_csv(const std::vector<CellRecord>& cells, const std::optional<std::string>& reference);
std::string winloss_csv(const std::vector<std::pair<std::string, stats::WinLoss>>& rows);
std::string cumulative_csv(const std::vector<CellRecord>& cells, const std::optional<std::string>& reference);

/// Points kept by the display filter: values outside
/// [Q1 - 10 IQR, Q3 + 10 IQR] of their model's distribution are dropped.
std::vector<bool> iqr_display_mask(const std::vector<double>& values, double factor = 10.0);

/// Minimal critical-difference diagram.
std::string cd_diagram_svg(const std::vector<std::string>& models, const std::vector<double>& average_ranks,
                           double cd, const std::vector<std::vector<std::size_t>>& groups, const std::string& title);

}  // namespace nirs::bench
