#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nirs/dataset.hpp"

namespace nirs {

enum class SearchFamily { automatic, linear, tabular };

std::string_view to_string(SearchFamily f);
SearchFamily parse_search_family(std::string_view s);

/// How to launch an external model adapter and which fixed settings it gets.
struct ExternalModelConfig {
  std::vector<std::string> command;   // empty: not installed
  nlohmann::json cv_params = nlohmann::json::object();
  nlohmann::json final_params = nlohmann::json::object();
  double timeout_s = 900.0;
  double handshake_timeout_s = 60.0;
};

struct BenchmarkManifest {
  std::vector<DatasetEntry> datasets;
  std::vector<std::string> models;
  SearchFamily search_space = SearchFamily::automatic;
  int folds = 3;
  int workers = 1;
  std::uint64_t seed = 0;
  std::map<std::string, ExternalModelConfig> external_models;
  nlohmann::json raw;  // snapshot written next to run artifacts

  void validate() const;
};

/// Built-in model ids: pls, plsda, ridge; tabpfn and catboost are
/// pre-registered externals (fixed settings of the search-space table) that
/// only need an adapter command.
bool is_builtin_model(std::string_view id);
std::map<std::string, ExternalModelConfig> default_external_models();

/// Loads and validates a JSON manifest. Relative paths resolve against the
/// manifest's directory. Throws ConfigError.
BenchmarkManifest load_manifest(const std::filesystem::path& path);
BenchmarkManifest parse_manifest(const nlohmann::json& doc, const std::filesystem::path& base_dir);

struct TaskSummary {
  std::size_t datasets = 0;
  double median_n = 0.0;
  double median_p = 0.0;
};

struct BenchmarkSummary {
  std::size_t datasets = 0;
  std::size_t databases = 0;
  TaskSummary regression;
  TaskSummary classification;
};

BenchmarkSummary summarize_benchmark(const BenchmarkManifest& manifest);
BenchmarkSummary summarize_datasets(const std::vector<Dataset>& datasets);

}  // namespace nirs
