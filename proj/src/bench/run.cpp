#include <chrono>
#include <ctime>
#include <fnmatch.h>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "nirs/bench.hpp"
#include "nirs/csv.hpp"
#include "nirs/error.hpp"
#include "nirs/manifest.hpp"

namespace nirs::bench {

using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

CellRecord failed_cell(const DatasetEntry& e, const std::string& model, const std::string& why) {
  CellRecord c;
  c.dataset = e.name;
  c.database = e.database;
  c.task = e.task;
  c.model = model;
  c.status = "failed";
  c.error = why;
  return c;
}

}  // namespace

RunSummary run(const RunOptions& opts, std::ostream& log) {
  BenchmarkManifest manifest = load_manifest(opts.config);
  if (opts.workers) {
    if (*opts.workers < 1) throw ConfigError("--workers must be >= 1");
    manifest.workers = *opts.workers;
  }
  if (opts.seed) manifest.seed = *opts.seed;
  std::vector<std::string> models = opts.models.empty() ? manifest.models : opts.models;
  for (const auto& m : models)
    if (!is_builtin_model(m) && !manifest.external_models.count(m))
      throw ConfigError("unknown model '" + m + "'");

  std::vector<DatasetEntry> entries;
  for (const auto& e : manifest.datasets)
    if (opts.datasets_glob.empty() || ::fnmatch(opts.datasets_glob.c_str(), e.name.c_str(), 0) == 0)
      entries.push_back(e);
  if (entries.empty()) throw ConfigError("no dataset matches '" + opts.datasets_glob + "'");

  const fs::path cells_dir = opts.out / "cells";
  fs::create_directories(cells_dir);
  json snapshot = manifest.raw;
  snapshot["workers"] = manifest.workers;
  snapshot["seed"] = manifest.seed;
  write_atomic(opts.out / "manifest.json", snapshot.dump(2) + "\n");

  search::SearchOptions sopts;
  sopts.folds = manifest.folds;
  sopts.workers = manifest.workers;
  sopts.seed = manifest.seed;
  if (manifest.search_space != SearchFamily::automatic) sopts.family = manifest.search_space;

  RunSummary sum;
  const std::string started = utc_now();
  for (const auto& entry : entries) {
    std::optional<Dataset> ds;
    std::string load_error;
    for (const auto& model : models) {
      ++sum.cells;
      const fs::path file = cells_dir / cell_file_name(entry.name, model);
      CellRecord cell;
      bool resumed = false;
      if (opts.resume && fs::exists(file)) {
        try {
          cell = cell_from_json(json::parse(read_text(file)));
          resumed = true;
        } catch (const std::exception& e) {
          log << "warning: ignoring unreadable " << file.string() << ": " << e.what() << "\n";
        }
      }
      if (!resumed) {
        if (!ds && load_error.empty()) {
          try {
            ds = load_dataset(entry);
          } catch (const std::exception& e) {
            load_error = e.what();
          }
        }
        const auto t0 = std::chrono::steady_clock::now();
        const std::string cell_start = utc_now();
        if (ds) {
          cell = to_record(search::run_cell(*ds, model, manifest.external_models, sopts));
        } else {
          cell = failed_cell(entry, model, "dataset: " + load_error);
        }
        cell.started_at = cell_start;
        cell.finished_at = utc_now();
        cell.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        write_atomic(file, to_json(cell).dump(1) + "\n");
        ++sum.computed;
      } else {
        ++sum.resumed;
      }
      if (cell.status == "ok") ++sum.ok;
      else if (cell.status == "unavailable") ++sum.unavailable;
      else if (cell.status == "unsupported") ++sum.unsupported;
      else ++sum.failed;

      log << entry.name << " " << model << " " << cell.status;
      if (cell.ok())
        log << " " << cell.pipeline << " " << cell.hyperparams << " cv=" << csv::format_double(cell.cv_score)
            << " test=" << csv::format_double(cell.test_score);
      else if (!cell.error.empty())
        log << ": " << cell.error;
      if (resumed) log << " (resumed)";
      log << "\n";
    }
  }

  json meta{{"started_at", started},
            {"finished_at", utc_now()},
            {"cells", sum.cells},
            {"computed", sum.computed},
            {"resumed", sum.resumed},
            {"ok", sum.ok},
            {"failed", sum.failed},
            {"unavailable", sum.unavailable},
            {"unsupported", sum.unsupported},
            {"models", models},
            {"search_space", std::string(to_string(manifest.search_space))},
            {"folds", manifest.folds},
            {"workers", manifest.workers},
            {"seed", manifest.seed}};
  write_atomic(opts.out / "run.json", meta.dump(2) + "\n");

  report({opts.out, opts.reference, false}, log);
  sum.exit_code = sum.failed > 0 ? kPartialFailure : kOk;
  return sum;
}

}  // namespace nirs::bench
