#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nirs/bench.hpp"
#include "nirs/error.hpp"
#include "nirs/manifest.hpp"
#include "nirs/search.hpp"

using namespace nirs;

int main(int argc, char** argv) {
  CLI::App app{"NIRS calibration benchmark"};
  app.require_subcommand(1);

  bench::RunOptions run_opts;
  std::string models_csv;
  int workers = 0;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run every (dataset, model) cell of a manifest");
  run->add_option("--config", run_opts.config, "Benchmark manifest (JSON)")->required();
  run->add_option("--out", run_opts.out, "Output directory")->required();
  auto* workers_opt = run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed, "Master seed");
  run->add_option("--models", models_csv, "Comma-separated model ids");
  run->add_option("--datasets", run_opts.datasets_glob, "Dataset name glob");
  run->add_flag("--resume", run_opts.resume, "Skip cells already on disk");
  run->add_option("--reference", run_opts.reference, "Reference model for relative metrics");

  bench::ReportOptions report_opts;
  auto* report = app.add_subcommand("report", "Rebuild report artifacts from a run directory");
  report->add_option("--run", report_opts.run_dir, "Run directory")->required();
  report->add_option("--reference", report_opts.reference, "Reference model");
  report->add_flag("--exact", report_opts.exact_friedman, "Also compute the exact Friedman p-value");

  std::string family;
  auto* list = app.add_subcommand("list-pipelines", "Print the preprocessing search space");
  list->add_option("family", family, "linear | tabular")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : bench::kConfigError;
  }

  try {
    if (*run) {
      if (*workers_opt) run_opts.workers = workers;
      if (*seed_opt) run_opts.seed = seed;
      std::stringstream ss(models_csv);
      for (std::string m; std::getline(ss, m, ',');)
        if (!m.empty()) run_opts.models.push_back(m);
      const bench::RunSummary s = bench::run(run_opts, std::cerr);
      std::cerr << "cells " << s.cells << ": ok " << s.ok << ", failed " << s.failed << ", unavailable "
                << s.unavailable << ", unsupported " << s.unsupported << " (computed " << s.computed << ", resumed "
                << s.resumed << ")\n";
      return s.exit_code;
    }
    if (*report) {
      bench::report(report_opts, std::cerr);
      return bench::kOk;
    }
    const SearchFamily f = parse_search_family(family);
    if (f == SearchFamily::automatic) throw ConfigError("list-pipelines needs 'linear' or 'tabular'");
    std::cout << search::list_pipelines(f);
    return bench::kOk;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bench::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return bench::kFatal;
  }
}
