#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include "nirs/bench.hpp"
#include "nirs/csv.hpp"
#include "nirs/error.hpp"
#include "nirs/eval.hpp"

namespace nirs::bench {

using nlohmann::json;
using csv::format_double;

std::vector<CellRecord> load_cells(const fs::path& run_dir) {
  const fs::path dir = run_dir / "cells";
  if (!fs::is_directory(dir)) throw ConfigError("no cells directory under " + run_dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::vector<CellRecord> cells;
  for (const auto& f : files) {
    try {
      cells.push_back(cell_from_json(json::parse(read_text(f))));
    } catch (const json::exception& e) {
      throw DataError("corrupt cell file " + f.string() + ": " + e.what());
    }
  }
  std::sort(cells.begin(), cells.end(), [](const CellRecord& a, const CellRecord& b) {
    return a.dataset != b.dataset ? a.dataset < b.dataset : a.model < b.model;
  });
  return cells;
}

namespace {

struct TaskAnalysis {
  Task task;
  std::optional<stats::RankTable> table;
  std::optional<stats::FriedmanResult> friedman;
  std::vector<std::vector<std::size_t>> groups;
  std::string reason;  // why no rank analysis
};

stats::Orientation orientation(Task t) {
  return t == Task::regression ? stats::Orientation::lower_is_better : stats::Orientation::higher_is_better;
}

std::vector<stats::ScoreRecord> score_records(const std::vector<CellRecord>& cells, Task task) {
  std::vector<stats::ScoreRecord> out;
  for (const auto& c : cells) {
    if (c.task != task || c.status == "unsupported") continue;
    out.push_back({c.dataset, c.database, c.model, c.ok() ? std::optional<double>(c.test_score) : std::nullopt});
  }
  return out;
}

TaskAnalysis analyse(const std::vector<CellRecord>& cells, Task task, bool exact) {
  TaskAnalysis a{task, {}, {}, {}, {}};
  const auto records = score_records(cells, task);
  if (records.empty()) {
    a.reason = "no cells";
    return a;
  }
  try {
    a.table = stats::aggregate_scores(records, orientation(task));
    a.friedman = stats::friedman_test(*a.table, exact);
    a.groups = stats::cd_groups(a.table->average_ranks, a.friedman->cd);
  } catch (const Error& e) {
    a.table.reset();
    a.friedman.reset();
    a.reason = e.what();
  }
  return a;
}

}  // namespace

void report(const ReportOptions& opts, std::ostream& log) {
  const std::vector<CellRecord> cells = load_cells(opts.run_dir);
  const fs::path& out = opts.run_dir;
  if (opts.reference &&
      std::none_of(cells.begin(), cells.end(), [&](const CellRecord& c) { return c.model == *opts.reference; }))
    throw ConfigError("reference model '" + *opts.reference + "' has no rows in " + out.string());

  write_atomic(out / "results.csv", results_csv(cells, opts.reference));
  write_atomic(out / "trials.csv", trials_csv(cells));
  write_atomic(out / "robustness.csv", robustness_csv(cells, opts.reference));
  write_atomic(out / "cumulative.csv", cumulative_csv(cells, opts.reference));

  std::string ranks = "task,model,average_rank,n_databases\n";
  std::string matrix = "task,database,model,score,rank\n";
  std::string groups_csv = "task,group,models\n";
  std::vector<std::pair<std::string, stats::WinLoss>> wl_rows;
  json friedman = json::object();

  for (Task task : {Task::regression, Task::classification}) {
    const std::string tname(to_string(task));
    const TaskAnalysis a = analyse(cells, task, opts.exact_friedman);
    if (!a.table) {
      if (a.reason != "no cells") friedman[tname] = {{"status", "insufficient"}, {"reason", a.reason}};
      continue;
    }
    const auto& t = *a.table;
    const auto& f = *a.friedman;
    for (std::size_t j = 0; j < t.n_models(); ++j)
      ranks += csv::join_row({tname, t.models[j], csv::format_fixed(t.average_ranks[j], 4),
                              std::to_string(t.n_databases())}) +
               "\n";
    for (std::size_t b = 0; b < t.n_databases(); ++b)
      for (std::size_t j = 0; j < t.n_models(); ++j)
        matrix += csv::join_row({tname, t.databases[b], t.models[j], format_double(t.scores(b, j)),
                                 format_double(t.ranks(b, j))}) +
                  "\n";
    for (std::size_t g = 0; g < a.groups.size(); ++g) {
      std::string names;
      for (std::size_t i : a.groups[g]) names += (names.empty() ? "" : ";") + t.models[i];
      groups_csv += csv::join_row({tname, std::to_string(g + 1), names}) + "\n";
    }
    json sig = json::array();
    for (std::size_t i = 0; i < t.n_models(); ++i)
      for (std::size_t j = i + 1; j < t.n_models(); ++j)
        if (f.significant[i][j]) sig.push_back({t.models[i], t.models[j]});
    friedman[tname] = {{"status", "ok"},
                       {"statistic", f.statistic},
                       {"df", f.df},
                       {"p_value", f.p_value},
                       {"exact_p_value", f.exact_p_value ? json(*f.exact_p_value) : json(nullptr)},
                       {"cd", f.cd},
                       {"n_databases", f.n_databases},
                       {"n_models", f.n_models},
                       {"models", t.models},
                       {"average_ranks", t.average_ranks},
                       {"dropped_databases", t.dropped_databases},
                       {"significant_pairs", sig}};
    write_atomic(out / ("cd_diagram_" + tname + ".svg"),
                 cd_diagram_svg(t.models, t.average_ranks, f.cd, a.groups, tname + " average ranks"));
    if (task == Task::regression || !fs::exists(out / "cd_diagram.svg"))
      write_atomic(out / "cd_diagram.svg",
                   cd_diagram_svg(t.models, t.average_ranks, f.cd, a.groups, tname + " average ranks"));

    const auto ref = reference_model(cells, task, opts.reference);
    if (ref) {
      const auto records = score_records(cells, task);
      for (const auto& m : t.models) {
        if (m == *ref) continue;
        wl_rows.emplace_back(tname + ":" + m + " vs " + *ref, stats::win_loss(records, m, *ref, orientation(task)));
      }
    }
  }

  write_atomic(out / "ranks.csv", ranks);
  write_atomic(out / "rank_matrix.csv", matrix);
  write_atomic(out / "cd_groups.csv", groups_csv);
  write_atomic(out / "friedman.json", friedman.dump(2) + "\n");
  write_atomic(out / "winloss.csv", winloss_csv(wl_rows));

  // Plot points: relative score per model with the wide IQR display filter.
  std::map<std::string, std::vector<std::pair<const CellRecord*, double>>> per_model;
  for (Task task : {Task::regression, Task::classification}) {
    const auto ref = reference_model(cells, task, opts.reference);
    if (!ref) continue;
    std::map<std::string, double> ref_scores;
    for (const auto& c : cells)
      if (c.task == task && c.model == *ref && c.ok()) ref_scores[c.dataset] = c.test_score;
    for (const auto& c : cells) {
      if (c.task != task || !c.ok() || c.model == *ref) continue;
      const auto it = ref_scores.find(c.dataset);
      if (it == ref_scores.end() || !(it->second > 0.0)) continue;
      const double g = task == Task::regression ? eval::irmsep(it->second, c.test_score)
                                                : eval::relative_acc_gain(it->second, c.test_score);
      per_model[std::string(to_string(task)) + ":" + c.model].emplace_back(&c, g);
    }
  }
  std::string points = "task,model,dataset,n,p,relative_score\n";
  std::size_t hidden = 0;
  for (const auto& [key, list] : per_model) {
    std::vector<double> vals;
    for (const auto& pr : list) vals.push_back(pr.second);
    const auto keep = iqr_display_mask(vals);
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!keep[i]) {
        ++hidden;
        continue;
      }
      const CellRecord& c = *list[i].first;
      points += csv::join_row({std::string(to_string(c.task)), c.model, c.dataset, std::to_string(c.n()),
                               std::to_string(c.p), format_double(list[i].second)}) +
                "\n";
    }
  }
  write_atomic(out / "plot_points.csv", points);
  log << "report: " << cells.size() << " cells";
  if (hidden) log << ", " << hidden << " plot points outside the display range";
  log << "\n";
}

}  // namespace nirs::bench
