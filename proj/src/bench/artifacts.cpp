#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include "nirs/bench.hpp"
#include "nirs/csv.hpp"
#include "nirs/error.hpp"
#include "nirs/eval.hpp"

namespace nirs::bench {

using nlohmann::json;
using csv::format_double;

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write " + tmp.string());
    os << content;
    os.flush();
    if (!os) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string cell_file_name(const std::string& dataset, const std::string& model) {
  auto clean = [](const std::string& s) {
    std::string o;
    for (char c : s) o.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_' ? c : '_');
    return o;
  };
  return clean(dataset) + "__" + clean(model) + ".json";
}

CellRecord to_record(const search::SearchOutcome& oc) {
  CellRecord c;
  c.dataset = oc.dataset;
  c.database = oc.database;
  c.task = oc.task;
  c.model = oc.model;
  c.status = oc.status;
  c.error = oc.error;
  c.n_cal = oc.n_cal;
  c.n_test = oc.n_test;
  c.p = oc.p;
  c.pipeline = oc.pipeline;
  c.hyperparams = oc.hyperparams;
  c.cv_score = oc.cv_score;
  c.test_score = oc.test_score;
  c.truncated = oc.truncated;
  c.robustness = oc.robustness;
  c.counts = oc.search.counts;
  c.physical_pipeline_fold_fits = oc.search.physical_pipeline_fold_fits;
  for (std::size_t i : oc.search.retained) c.retained.push_back(oc.search.phase1[i].pipeline.to_text());
  c.test_audit = oc.test_audit;
  c.test_evaluations = static_cast<int>(oc.test_audit.size());
  for (const auto* list : {&oc.search.phase1, &oc.search.phase2})
    for (const auto& pr : *list) {
      if (pr.failed && pr.trials.empty()) {
        TrialRow r;
        r.phase = pr.phase;
        r.cached = pr.cached;
        r.pipeline = pr.pipeline.to_text();
        r.failed = true;
        r.error = pr.error;
        c.trials.push_back(std::move(r));
        continue;
      }
      for (const auto& t : pr.trials) {
        TrialRow r;
        r.phase = pr.phase;
        r.cached = pr.cached;
        r.pipeline = t.pipeline;
        r.hyperparams = t.hyperparams;
        r.fold_scores = t.fold_scores;
        r.mean_score = t.mean_score;
        r.failed = t.failed;
        r.error = t.error;
        r.wall_ms = t.wall_ms;
        c.trials.push_back(std::move(r));
      }
    }
  return c;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
std::optional<double> opt_double(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

json to_json(const CellRecord& c) {
  json trials = json::array();
  for (const auto& t : c.trials)
    trials.push_back({{"phase", t.phase},
                      {"cached", t.cached},
                      {"pipeline", t.pipeline},
                      {"hyperparams", t.hyperparams},
                      {"fold_scores", t.fold_scores},
                      {"mean_score", t.mean_score},
                      {"failed", t.failed},
                      {"error", t.error},
                      {"wall_ms", t.wall_ms}});
  const auto& rb = c.robustness;
  return json{{"dataset", c.dataset},
              {"database", c.database},
              {"task", std::string(to_string(c.task))},
              {"model", c.model},
              {"status", c.status},
              {"error", c.error},
              {"n_cal", c.n_cal},
              {"n_test", c.n_test},
              {"p", c.p},
              {"pipeline", c.pipeline},
              {"hyperparams", c.hyperparams},
              {"cv_score", c.cv_score},
              {"test_score", c.test_score},
              {"truncated", c.truncated},
              {"robustness",
               {{"a95", rb.a95 ? json(*rb.a95) : json(nullptr)},
                {"t2_threshold", opt(rb.t2_threshold)},
                {"n_out", rb.n_out},
                {"n_excluded", rb.n_excluded},
                {"rmsep_out", opt(rb.rmsep_out)},
                {"n_extra", rb.n_extra},
                {"rmsep_extra", opt(rb.rmsep_extra)},
                {"note", rb.note}}},
              {"counts",
               {{"phase1_pipelines", c.counts.phase1_pipelines},
                {"phase2_pipelines", c.counts.phase2_pipelines},
                {"cached_pipelines", c.counts.cached_pipelines},
                {"folds", c.counts.folds},
                {"configs_per_pipeline", c.counts.configs_per_pipeline},
                {"total_pipelines", c.counts.total_pipelines()},
                {"pipeline_fold_fits", c.counts.pipeline_fold_fits()},
                {"fit_operations", c.counts.fit_operations()},
                {"physical_pipeline_fold_fits", c.physical_pipeline_fold_fits}}},
              {"retained", c.retained},
              {"test_evaluations", c.test_evaluations},
              {"test_audit", c.test_audit},
              {"started_at", c.started_at},
              {"finished_at", c.finished_at},
              {"wall_ms", c.wall_ms},
              {"trials", trials}};
}

CellRecord cell_from_json(const json& j) {
  CellRecord c;
  c.dataset = j.at("dataset").get<std::string>();
  c.database = j.at("database").get<std::string>();
  c.task = parse_task(j.at("task").get<std::string>());
  c.model = j.at("model").get<std::string>();
  c.status = j.at("status").get<std::string>();
  c.error = j.value("error", "");
  c.n_cal = j.value("n_cal", std::size_t{0});
  c.n_test = j.value("n_test", std::size_t{0});
  c.p = j.value("p", std::size_t{0});
  c.pipeline = j.value("pipeline", "");
  c.hyperparams = j.value("hyperparams", "");
  c.cv_score = j.value("cv_score", 0.0);
  c.test_score = j.value("test_score", 0.0);
  c.truncated = j.value("truncated", false);
  if (j.contains("robustness")) {
    const json& r = j["robustness"];
    if (r.contains("a95") && !r["a95"].is_null()) c.robustness.a95 = r["a95"].get<int>();
    c.robustness.t2_threshold = opt_double(r, "t2_threshold");
    c.robustness.n_out = r.value("n_out", std::size_t{0});
    c.robustness.n_excluded = r.value("n_excluded", std::size_t{0});
    c.robustness.rmsep_out = opt_double(r, "rmsep_out");
    c.robustness.n_extra = r.value("n_extra", std::size_t{0});
    c.robustness.rmsep_extra = opt_double(r, "rmsep_extra");
    c.robustness.note = r.value("note", "");
  }
  if (j.contains("counts")) {
    const json& k = j["counts"];
    c.counts.phase1_pipelines = k.value("phase1_pipelines", std::size_t{0});
    c.counts.phase2_pipelines = k.value("phase2_pipelines", std::size_t{0});
    c.counts.cached_pipelines = k.value("cached_pipelines", std::size_t{0});
    c.counts.folds = k.value("folds", 0);
    c.counts.configs_per_pipeline = k.value("configs_per_pipeline", 0);
    c.physical_pipeline_fold_fits = k.value("physical_pipeline_fold_fits", 0);
  }
  c.retained = j.value("retained", std::vector<std::string>{});
  c.test_evaluations = j.value("test_evaluations", 0);
  c.test_audit = j.value("test_audit", std::vector<std::string>{});
  c.started_at = j.value("started_at", "");
  c.finished_at = j.value("finished_at", "");
  c.wall_ms = j.value("wall_ms", 0.0);
  for (const auto& t : j.value("trials", json::array())) {
    TrialRow r;
    r.phase = t.value("phase", 1);
    r.cached = t.value("cached", false);
    r.pipeline = t.value("pipeline", "");
    r.hyperparams = t.value("hyperparams", "");
    r.fold_scores = t.value("fold_scores", std::vector<double>{});
    r.mean_score = t.value("mean_score", 0.0);
    r.failed = t.value("failed", false);
    r.error = t.value("error", "");
    r.wall_ms = t.value("wall_ms", 0.0);
    c.trials.push_back(std::move(r));
  }
  return c;
}

std::optional<std::string> reference_model(const std::vector<CellRecord>& cells, Task task,
                                           const std::optional<std::string>& requested) {
  auto present = [&](const std::string& m) {
    return std::any_of(cells.begin(), cells.end(), [&](const CellRecord& c) { return c.task == task && c.model == m; });
  };
  if (requested) return present(*requested) ? requested : std::nullopt;
  if (task == Task::regression) return present("pls") ? std::optional<std::string>("pls") : std::nullopt;
  if (present("plsda")) return std::string("plsda");
  if (present("pls")) return std::string("pls");
  return std::nullopt;
}

namespace {

// dataset -> reference test score, ok cells only.
std::map<std::string, double> reference_scores(const std::vector<CellRecord>& cells, Task task,
                                               const std::optional<std::string>& ref) {
  std::map<std::string, double> out;
  if (!ref) return out;
  for (const auto& c : cells)
    if (c.task == task && c.model == *ref && c.ok()) out[c.dataset] = c.test_score;
  return out;
}

std::optional<double> relative(Task task, double ref, double cmp) {
  if (!(ref > 0.0)) return std::nullopt;
  return task == Task::regression ? eval::irmsep(ref, cmp) : eval::relative_acc_gain(ref, cmp);
}

std::string fmt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

struct RefCache {
  std::optional<std::string> name[2];
  std::map<std::string, double> scores[2];

  RefCache(const std::vector<CellRecord>& cells, const std::optional<std::string>& requested) {
    for (int t = 0; t < 2; ++t) {
      const Task task = t == 0 ? Task::regression : Task::classification;
      name[t] = reference_model(cells, task, requested);
      scores[t] = reference_scores(cells, task, name[t]);
    }
  }
  int idx(Task t) const { return t == Task::regression ? 0 : 1; }
  std::optional<double> ref_score(const CellRecord& c) const {
    const auto& m = scores[idx(c.task)];
    const auto it = m.find(c.dataset);
    if (it == m.end()) return std::nullopt;
    return it->second;
  }
  std::optional<double> gain(const CellRecord& c) const {
    if (!c.ok()) return std::nullopt;
    const auto r = ref_score(c);
    if (!r) return std::nullopt;
    return relative(c.task, *r, c.test_score);
  }
};

}  // namespace

std::string results_csv(const std::vector<CellRecord>& cells, const std::optional<std::string>& reference) {
  const RefCache refs(cells, reference);
  std::string out =
      "dataset,database,task,model,status,pipeline,hyperparams,cv_metric,cv_score,test_metric,test_score,"
      "reference,relative_metric,relative_score,n_cal,n_test,p,truncated,error\n";
  for (const auto& c : cells) {
    const bool reg = c.task == Task::regression;
    const auto& ref = refs.name[refs.idx(c.task)];
    out += csv::join_row({c.dataset, c.database, std::string(to_string(c.task)), c.model, c.status,
                          c.ok() ? c.pipeline : "", c.ok() ? c.hyperparams : "", reg ? "rmsecv" : "acc_cv",
                          c.ok() ? format_double(c.cv_score) : "", reg ? "rmsep" : "accp",
                          c.ok() ? format_double(c.test_score) : "", ref.value_or(""),
                          reg ? "irmsep_pct" : "rel_acc_gain_pct", fmt(refs.gain(c)), std::to_string(c.n_cal),
                          std::to_string(c.n_test), std::to_string(c.p), c.truncated ? "1" : "0", c.error}) +
           "\n";
  }
  return out;
}

std::string trials_csv(const std::vector<CellRecord>& cells) {
  std::string out = "dataset,model,phase,cached,pipeline,hyperparams,fold_scores,mean_score,failed,error\n";
  for (const auto& c : cells)
    for (const auto& t : c.trials) {
      std::string folds;
      for (std::size_t i = 0; i < t.fold_scores.size(); ++i) folds += (i ? ";" : "") + format_double(t.fold_scores[i]);
      out += csv::join_row({c.dataset, c.model, std::to_string(t.phase), t.cached ? "1" : "0", t.pipeline,
                            t.hyperparams, folds, t.failed ? "" : format_double(t.mean_score), t.failed ? "1" : "0",
                            t.error}) +
             "\n";
    }
  return out;
}

std::string robustness_csv(const std::vector<CellRecord>& cells, const std::optional<std::string>& reference) {
  const RefCache refs(cells, reference);
  // (dataset) -> reference subset RMSEPs.
  std::map<std::string, const CellRecord*> ref_cells;
  for (const auto& c : cells) {
    const auto& ref = refs.name[refs.idx(c.task)];
    if (ref && c.model == *ref && c.ok()) ref_cells[c.dataset] = &c;
  }
  std::string out =
      "dataset,model,n_test,a95,t2_threshold,n_out,pct_out,rmsep_out,irmsep_out,n_extra,rmsep_extra,irmsep_extra,"
      "note\n";
  for (const auto& c : cells) {
    if (!c.ok()) continue;
    const auto& rb = c.robustness;
    std::optional<double> ir_out, ir_extra;
    const auto it = ref_cells.find(c.dataset);
    if (it != ref_cells.end() && c.task == Task::regression) {
      const auto& rr = it->second->robustness;
      if (rr.rmsep_out && rb.rmsep_out && *rr.rmsep_out > 0.0) ir_out = eval::irmsep(*rr.rmsep_out, *rb.rmsep_out);
      if (rr.rmsep_extra && rb.rmsep_extra && *rr.rmsep_extra > 0.0)
        ir_extra = eval::irmsep(*rr.rmsep_extra, *rb.rmsep_extra);
    }
    const std::string pct =
        c.n_test > 0 ? format_double(100.0 * static_cast<double>(rb.n_out) / static_cast<double>(c.n_test)) : "";
    out += csv::join_row({c.dataset, c.model, std::to_string(c.n_test), rb.a95 ? std::to_string(*rb.a95) : "",
                          fmt(rb.t2_threshold), std::to_string(rb.n_out), pct, fmt(rb.rmsep_out), fmt(ir_out),
                          std::to_string(rb.n_extra), fmt(rb.rmsep_extra), fmt(ir_extra), rb.note}) +
           "\n";
  }
  return out;
}

std::string winloss_csv(const std::vector<std::pair<std::string, stats::WinLoss>>& rows) {
  std::string out = "comparison,wins,ties,losses,win_rate,non_loss_rate\n";
  for (const auto& [name, w] : rows)
    out += csv::join_row({name, std::to_string(w.wins), std::to_string(w.ties), std::to_string(w.losses),
                          csv::format_fixed(w.win_rate, 3), csv::format_fixed(w.non_loss_rate, 3)}) +
           "\n";
  return out;
}

std::string cumulative_csv(const std::vector<CellRecord>& cells, const std::optional<std::string>& reference) {
  const RefCache refs(cells, reference);
  std::map<std::string, std::vector<const CellRecord*>> by_model;
  for (const auto& c : cells)
    if (c.task == Task::regression && c.ok() && refs.gain(c)) by_model[c.model].push_back(&c);
  std::string out = "model,order_by,position,dataset,n,p,np,irmsep,cumulative_irmsep\n";
  const std::pair<const char*, std::size_t (*)(const CellRecord&)> keys[] = {
      {"n", [](const CellRecord& c) { return c.n(); }},
      {"p", [](const CellRecord& c) { return c.p; }},
      {"np", [](const CellRecord& c) { return c.n() * c.p; }}};
  for (const auto& [model, list] : by_model) {
    for (const auto& [name, key] : keys) {
      auto sorted = list;
      std::sort(sorted.begin(), sorted.end(), [&](const CellRecord* a, const CellRecord* b) {
        const auto ka = key(*a), kb = key(*b);
        return ka != kb ? ka < kb : a->dataset < b->dataset;
      });
      double cum = 0.0;
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double g = *refs.gain(*sorted[i]);
        cum += g;
        out += csv::join_row({model, name, std::to_string(i + 1), sorted[i]->dataset, std::to_string(sorted[i]->n()),
                              std::to_string(sorted[i]->p), std::to_string(sorted[i]->n() * sorted[i]->p),
                              format_double(g), format_double(cum)}) +
               "\n";
      }
    }
  }
  return out;
}

namespace {

// Linear-interpolation quantile of sorted data.
double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o.push_back(c);
    }
  }
  return o;
}

std::string num(double v) { return csv::format_fixed(v, 2); }

}  // namespace

std::vector<bool> iqr_display_mask(const std::vector<double>& values, double factor) {
  std::vector<bool> keep(values.size(), true);
  if (values.size() < 4) return keep;
  std::vector<double> s = values;
  std::sort(s.begin(), s.end());
  const double q1 = quantile_sorted(s, 0.25);
  const double q3 = quantile_sorted(s, 0.75);
  const double iqr = q3 - q1;
  for (std::size_t i = 0; i < values.size(); ++i)
    keep[i] = values[i] >= q1 - factor * iqr && values[i] <= q3 + factor * iqr;
  return keep;
}

std::string cd_diagram_svg(const std::vector<std::string>& models, const std::vector<double>& ranks, double cd,
                           const std::vector<std::vector<std::size_t>>& groups, const std::string& title) {
  const std::size_t k = models.size();
  const double width = 640, left = 140, right = 500, axis_y = 80;
  auto x_of = [&](double r) { return left + (right - left) * (r - 1.0) / std::max(1.0, static_cast<double>(k) - 1.0); };
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });
  const double height = axis_y + 40 + 22.0 * static_cast<double>((k + 1) / 2) + 12.0 * static_cast<double>(groups.size()) + 20;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << num(height)
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "  <title>" << xml_escape(title) << "</title>\n";
  os << "  <line x1=\"" << left << "\" y1=\"" << axis_y << "\" x2=\"" << right << "\" y2=\"" << axis_y
     << "\" stroke=\"black\"/>\n";
  for (std::size_t r = 1; r <= std::max<std::size_t>(k, 2); ++r) {
    const double x = x_of(static_cast<double>(r));
    os << "  <line x1=\"" << num(x) << "\" y1=\"" << axis_y - 5 << "\" x2=\"" << num(x) << "\" y2=\"" << axis_y
       << "\" stroke=\"black\"/>\n";
    os << "  <text x=\"" << num(x) << "\" y=\"" << axis_y - 8 << "\" text-anchor=\"middle\">" << r << "</text>\n";
  }
  // Critical distance bar.
  os << "  <g class=\"cd\">\n    <line x1=\"" << num(x_of(1.0)) << "\" y1=\"30\" x2=\"" << num(x_of(1.0 + cd))
     << "\" y2=\"30\" stroke=\"black\" stroke-width=\"2\"/>\n";
  os << "    <text x=\"" << num(x_of(1.0)) << "\" y=\"22\">CD = " << csv::format_fixed(cd, 3) << "</text>\n  </g>\n";

  const std::size_t half = (k + 1) / 2;
  for (std::size_t pos = 0; pos < k; ++pos) {
    const std::size_t i = order[pos];
    const double x = x_of(ranks[i]);
    const bool on_left = pos < half;
    const double y = axis_y + 30 + 22.0 * static_cast<double>(on_left ? pos : k - 1 - pos);
    const double lx = on_left ? left - 10 : right + 10;
    os << "  <polyline fill=\"none\" stroke=\"black\" points=\"" << num(x) << "," << axis_y << " " << num(x) << ","
       << num(y) << " " << num(lx) << "," << num(y) << "\"/>\n";
    os << "  <text class=\"model\" x=\"" << num(on_left ? lx - 4 : lx + 4) << "\" y=\"" << num(y + 4)
       << "\" text-anchor=\"" << (on_left ? "end" : "start") << "\">" << xml_escape(models[i]) << " ("
       << csv::format_fixed(ranks[i], 3) << ")</text>\n";
  }
  double gy = axis_y + 12;
  for (const auto& g : groups) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t i : g) {
      lo = std::min(lo, ranks[i]);
      hi = std::max(hi, ranks[i]);
    }
    os << "  <line class=\"group\" x1=\"" << num(x_of(lo) - 3) << "\" y1=\"" << num(gy) << "\" x2=\""
       << num(x_of(hi) + 3) << "\" y2=\"" << num(gy) << "\" stroke=\"black\" stroke-width=\"4\"/>\n";
    gy += 6;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace nirs::bench
