#pragma once

#include <cstdio>
#include <sys/wait.h>

#include <json.hpp>

#include "fixtures.hpp"
#include "nirs/bench.hpp"

namespace nirs::testing {

/// Writes each dataset as CSV plus a manifest next to them.
inline std::filesystem::path write_benchmark(const std::filesystem::path& dir, const std::vector<Dataset>& datasets,
                                             const std::vector<std::string>& models,
                                             nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json doc = extra;
  doc["models"] = models;
  doc["datasets"] = nlohmann::json::array();
  for (const auto& ds : datasets) {
    write_file(dir / (ds.name + ".csv"), dataset_to_csv(ds, "y"));
    nlohmann::json split = {{"method", ds.task == Task::classification ? "spxy_stratified" : "spxy"},
                            {"test_fraction", ds.split.test_fraction}};
    doc["datasets"].push_back({{"name", ds.name},
                               {"database", ds.database},
                               {"task", std::string(to_string(ds.task))},
                               {"path", ds.name + ".csv"},
                               {"target", "y"},
                               {"split", split}});
  }
  const auto path = dir / "manifest.json";
  write_file(path, doc.dump(2));
  return path;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

/// Runs a shell command, capturing stdout and stderr.
inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* f = ::popen((cmd + " 2>&1").c_str(), "r");
  if (!f) return r;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) r.output.append(buf, got);
  const int status = ::pclose(f);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline bench::CellRecord synthetic_cell(const std::string& dataset, const std::string& database,
                                        const std::string& model, double score, Task task = Task::regression) {
  bench::CellRecord c;
  c.dataset = dataset;
  c.database = database;
  c.task = task;
  c.model = model;
  c.status = "ok";
  c.pipeline = "snv";
  c.hyperparams = "n_components=3";
  c.cv_score = score;
  c.test_score = score;
  c.n_cal = 75;
  c.n_test = 25;
  c.p = 100;
  return c;
}

inline void write_cells(const std::filesystem::path& run_dir, const std::vector<bench::CellRecord>& cells) {
  for (const auto& c : cells)
    bench::write_atomic(run_dir / "cells" / bench::cell_file_name(c.dataset, c.model), bench::to_json(c).dump());
}

}  // namespace nirs::testing
