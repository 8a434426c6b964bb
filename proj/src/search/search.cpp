#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "nirs/error.hpp"
#include "nirs/eval.hpp"
#include "nirs/search.hpp"
#include "nirs/thread_pool.hpp"

namespace nirs::search {

using models::PredictorKind;
using models::PredictorSpec;
using preproc::PipelineSpec;

namespace {

// Hyperparameter losses this close to the best are ties.
double tie_tolerance(double best) { return 1e-10 * std::max(1.0, std::abs(best)); }

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

bool is_pls(PredictorKind k) { return k == PredictorKind::pls || k == PredictorKind::plsda; }

int configs_per_pipeline(PredictorKind k, const SearchOptions& opts) {
  if (is_pls(k)) return models::kMaxPlsComponents;
  if (k == PredictorKind::ridge) return opts.tpe_trials;
  return 1;
}

double fold_score(const CalibrationSet& val, std::span<const double> pred) {
  if (val.task == Task::regression) return eval::rmse(val.y, pred);
  std::vector<int> labels(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) labels[i] = static_cast<int>(std::lround(pred[i]));
  return eval::balanced_accuracy(val.labels, labels);
}

double fold_score_labels(const CalibrationSet& val, const std::vector<int>& labels) {
  return eval::balanced_accuracy(val.labels, labels);
}

double to_loss(Task task, double mean_score) { return task == Task::regression ? mean_score : -mean_score; }

std::vector<double> external_predict(bridge::ExternalModel& adapter, const std::string& run_id, Task task,
                                     const nlohmann::json& params, const Matrix& X, std::span<const double> y,
                                     const Matrix& Q, int n_classes) {
  bridge::FitPredictRequest req;
  req.run_id = run_id;
  req.task = task;
  req.fixed_params = params;
  req.x = &X;
  req.y.assign(y.begin(), y.end());
  req.q = &Q;
  std::vector<double> pred = adapter.fit_predict(req);
  if (task == Task::classification)
    for (double v : pred) {
      const long id = std::lround(v);
      if (id < 0 || id >= n_classes || static_cast<double>(id) != v)
        throw bridge::BridgeError(bridge::BridgeError::Kind::protocol, "prediction is not a valid label id");
    }
  return pred;
}

struct PreparedFold {
  CalibrationSet train;
  CalibrationSet val;
  Matrix Xt_train;
  Matrix Xt_val;
};

PreparedFold prepare_fold(const PipelineSpec& pipeline, const CalibrationSet& cal,
                          const sampling::FoldAssignment& folds, int f) {
  PreparedFold pf;
  const auto tr = folds.train_rows(f);
  const auto va = folds.validation_rows(f);
  pf.train = cal.subset(tr);
  pf.val = cal.subset(va);
  preproc::PipelineFit fit = preproc::fit_pipeline(pipeline, pf.train.X, pf.train.response());
  pf.Xt_train = std::move(fit.calibration);
  pf.Xt_val = fit.pipeline.apply(pf.val.X);
  return pf;
}

void finish_trial(TrialRecord& t, Task task) {
  double s = 0.0;
  for (double v : t.fold_scores) s += v;
  t.mean_score = s / static_cast<double>(t.fold_scores.size());
  t.loss = to_loss(task, t.mean_score);
  if (!std::isfinite(t.loss)) {
    t.failed = true;
    t.error = "non-finite cross-validation score";
  }
}

// First trial whose loss is within tolerance of the minimum. Callers order
// trials so that "first" is the preferred tie-break.
std::optional<std::size_t> pick_best(const std::vector<TrialRecord>& trials, const std::vector<std::size_t>& order) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i : order)
    if (!trials[i].failed) best = std::min(best, trials[i].loss);
  if (!std::isfinite(best)) return std::nullopt;
  for (std::size_t i : order)
    if (!trials[i].failed && trials[i].loss <= best + tie_tolerance(best)) return i;
  return std::nullopt;
}

void evaluate_pls(const PipelineSpec& pipeline, const CalibrationSet& cal, const sampling::FoldAssignment& folds,
                  PipelineResult& out) {
  const int K = folds.k;
  const int A_max = models::kMaxPlsComponents;
  // scores[f][a-1], NaN when the component count is not available in fold f.
  std::vector<std::vector<double>> scores(static_cast<std::size_t>(K),
                                          std::vector<double>(static_cast<std::size_t>(A_max), std::nan("")));
  std::vector<int> caps(static_cast<std::size_t>(K), 0);
  const auto t0 = std::chrono::steady_clock::now();
  for (int f = 0; f < K; ++f) {
    PreparedFold pf = prepare_fold(pipeline, cal, folds, f);
    const int cap = static_cast<int>(std::min<std::size_t>(
        {static_cast<std::size_t>(A_max), pf.train.n() - 1, pf.Xt_train.cols()}));
    caps[static_cast<std::size_t>(f)] = cap;
    const models::PlsModel m = models::pls_nipals(pf.Xt_train, pf.train.response(), cap);
    const auto path = m.predict_path(pf.Xt_val);
    for (std::size_t a = 0; a < path.size(); ++a) {
      if (cal.task == Task::regression) {
        scores[static_cast<std::size_t>(f)][a] = eval::rmse(pf.val.y, path[a].column(0));
      } else {
        scores[static_cast<std::size_t>(f)][a] = fold_score_labels(pf.val, models::argmax_rows(path[a]));
      }
    }
  }
  const double per_trial_ms = ms_since(t0) / A_max;
  std::vector<std::size_t> order;
  for (int a = 1; a <= A_max; ++a) {
    TrialRecord t;
    t.pipeline = out.pipeline.to_text();
    t.spec = cal.task == Task::regression ? PredictorSpec::pls(a) : PredictorSpec::plsda(a);
    t.hyperparams = t.spec.hyperparams_text();
    t.wall_ms = per_trial_ms;
    for (int f = 0; f < K; ++f) {
      const double s = scores[static_cast<std::size_t>(f)][static_cast<std::size_t>(a - 1)];
      if (std::isnan(s)) {
        t.failed = true;
        t.error = a > caps[static_cast<std::size_t>(f)]
                      ? "component count above min(n_fold_train-1, p) in fold " + std::to_string(f)
                      : "covariance exhausted before component " + std::to_string(a) + " in fold " +
                            std::to_string(f);
        break;
      }
      t.fold_scores.push_back(s);
    }
    if (!t.failed) finish_trial(t, cal.task);
    order.push_back(out.trials.size());
    out.trials.push_back(std::move(t));
  }
  out.best = pick_best(out.trials, order);
}

// Fold state needed to score any alpha without refitting.
struct RidgeFold {
  Matrix projected;
  std::unique_ptr<models::RidgePath> path;
  std::vector<double> y_val;
};

void evaluate_ridge(const PipelineSpec& pipeline, const CalibrationSet& cal, const sampling::FoldAssignment& folds,
                    const SearchOptions& opts, PipelineResult& out) {
  if (cal.task != Task::regression) throw ParameterError("ridge applies to regression only");
  std::vector<RidgeFold> rf;
  const auto t0 = std::chrono::steady_clock::now();
  for (int f = 0; f < folds.k; ++f) {
    PreparedFold pf = prepare_fold(pipeline, cal, folds, f);
    RidgeFold r;
    r.path = std::make_unique<models::RidgePath>(pf.Xt_train, pf.train.y);
    r.projected = r.path->project(pf.Xt_val);
    r.y_val = pf.val.y;
    rf.push_back(std::move(r));
  }
  const double prep_ms = ms_since(t0) / std::max(1, opts.tpe_trials);

  const std::uint64_t seed = stable_hash(out.pipeline.to_text(), opts.seed);
  std::vector<TpeObservation> history;
  for (int i = 0; i < opts.tpe_trials; ++i) {
    const auto t1 = std::chrono::steady_clock::now();
    const double x = tpe_suggest(history, opts.tpe, seed, i);
    TrialRecord t;
    t.pipeline = out.pipeline.to_text();
    t.spec = PredictorSpec::ridge(std::pow(10.0, x));
    t.hyperparams = t.spec.hyperparams_text();
    try {
      for (const auto& r : rf) t.fold_scores.push_back(eval::rmse(r.y_val, r.path->predict(r.projected, t.spec.alpha)));
      finish_trial(t, cal.task);
    } catch (const Error& e) {
      t.failed = true;
      t.error = e.what();
    }
    if (!t.failed) history.push_back({x, t.loss});
    t.wall_ms = prep_ms + ms_since(t1);
    out.trials.push_back(std::move(t));
  }
  // Ties go to the smaller alpha, then the earlier trial.
  std::vector<std::size_t> order(out.trials.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.trials[a].spec.alpha < out.trials[b].spec.alpha; });
  out.best = pick_best(out.trials, order);
}

void evaluate_external(const PipelineSpec& pipeline, const ModelSetup& model, const CalibrationSet& cal,
                       const sampling::FoldAssignment& folds, AdapterPool* adapters, int worker,
                       PipelineResult& out) {
  if (!adapters) throw ParameterError("external model '" + model.id + "' needs an adapter pool");
  TrialRecord t;
  t.pipeline = pipeline.to_text();
  t.spec = PredictorSpec::external(model.id);
  t.hyperparams = t.spec.hyperparams_text();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    for (int f = 0; f < folds.k; ++f) {
      PreparedFold pf = prepare_fold(pipeline, cal, folds, f);
      const auto pred = external_predict(adapters->get(worker), "cv", cal.task, model.external.cv_params,
                                         pf.Xt_train, pf.train.y, pf.Xt_val, cal.n_classes);
      t.fold_scores.push_back(fold_score(pf.val, pred));
    }
    finish_trial(t, cal.task);
  } catch (const Error& e) {
    t.failed = true;
    t.error = e.what();
  }
  t.wall_ms = ms_since(t0);
  out.trials.push_back(std::move(t));
  out.best = pick_best(out.trials, {0});
}

}  // namespace

// ---- calibration / test views ------------------------------------------------

Matrix CalibrationSet::response() const {
  if (task == Task::regression) return preproc::target_column(y);
  return preproc::one_hot(labels, n_classes);
}

CalibrationSet CalibrationSet::subset(std::span<const std::size_t> rows) const {
  CalibrationSet s;
  s.task = task;
  s.n_classes = n_classes;
  s.X = X.select_rows(rows);
  s.y = select(y, rows);
  if (task == Task::classification)
    for (std::size_t r : rows) s.labels.push_back(labels[r]);
  return s;
}

CalibrationSet calibration_set(const Dataset& ds, std::span<const std::size_t> train_rows) {
  CalibrationSet c;
  c.task = ds.task;
  c.X = ds.X.values().select_rows(train_rows);
  const std::vector<double> all = ds.y.as_real();
  c.y = select(all, train_rows);
  if (ds.task == Task::classification) {
    c.n_classes = static_cast<int>(ds.y.n_classes());
    for (std::size_t r : train_rows) c.labels.push_back(ds.y.labels[r]);
  }
  return c;
}

TestSetAccess::TestSetAccess(const Dataset& ds, std::vector<std::size_t> test_rows)
    : ds_(&ds), rows_(std::move(test_rows)) {}

TestSetAccess::View TestSetAccess::read(const std::string& purpose) {
  log_.push_back(purpose);
  View v;
  v.X = ds_->X.values().select_rows(rows_);
  v.y = select(ds_->y.as_real(), rows_);
  if (ds_->task == Task::classification)
    for (std::size_t r : rows_) v.labels.push_back(ds_->y.labels[r]);
  return v;
}

// ---- models ------------------------------------------------------------------

std::optional<ModelSetup> resolve_model(const std::string& id, Task task,
                                        const std::map<std::string, ExternalModelConfig>& externals) {
  ModelSetup m;
  m.id = id;
  if (id == "pls" || id == "plsda") {
    m.kind = task == Task::regression ? PredictorKind::pls : PredictorKind::plsda;
    if (id == "plsda" && task == Task::regression) return std::nullopt;
    return m;
  }
  if (id == "ridge") {
    if (task != Task::regression) return std::nullopt;
    m.kind = PredictorKind::ridge;
    return m;
  }
  const auto it = externals.find(id);
  if (it == externals.end()) throw ConfigError("unknown model '" + id + "'");
  m.kind = PredictorKind::external;
  m.external = it->second;
  return m;
}

SearchFamily default_family(PredictorKind kind) {
  return kind == PredictorKind::external ? SearchFamily::tabular : SearchFamily::linear;
}

AdapterPool::AdapterPool(std::string model_id, ExternalModelConfig config, int workers)
    : model_id_(std::move(model_id)), config_(std::move(config)),
      slots_(static_cast<std::size_t>(std::max(1, workers))) {}

bridge::ExternalModel& AdapterPool::get(int worker) {
  auto& slot = slots_.at(static_cast<std::size_t>(worker));
  if (!slot || !slot->alive()) {
    bridge::AdapterTimeouts t;
    t.handshake = std::chrono::milliseconds(static_cast<long long>(config_.handshake_timeout_s * 1000.0));
    t.call = std::chrono::milliseconds(static_cast<long long>(config_.timeout_s * 1000.0));
    slot.reset();
    slot.emplace(bridge::ExternalModel::spawn(model_id_, config_.command, t));
    ++spawned_;
  }
  return *slot;
}

void AdapterPool::shutdown_all() {
  for (auto& s : slots_)
    if (s) s->shutdown();
}

// ---- search --------------------------------------------------------------------

PipelineResult evaluate_pipeline(const PipelineSpec& pipeline, const ModelSetup& model, const CalibrationSet& cal,
                                 const sampling::FoldAssignment& folds, const SearchOptions& opts,
                                 AdapterPool* adapters, int worker) {
  PipelineResult out;
  out.pipeline = pipeline;
  try {
    if (is_pls(model.kind)) evaluate_pls(pipeline, cal, folds, out);
    else if (model.kind == PredictorKind::ridge) evaluate_ridge(pipeline, cal, folds, opts, out);
    else evaluate_external(pipeline, model, cal, folds, adapters, worker, out);
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
    out.trials.clear();
    out.best.reset();
  }
  if (!out.failed && !out.best) {
    out.failed = true;
    for (const auto& t : out.trials)
      if (t.failed && !t.error.empty()) {
        out.error = "all trials failed: " + t.error;
        break;
      }
    if (out.error.empty()) out.error = "all trials failed";
  }
  return out;
}

const PipelineResult* SearchResult::best_pipeline() const {
  if (!best) return nullptr;
  return best->first == 1 ? &phase1[best->second] : &phase2[best->second];
}

sampling::FoldAssignment make_folds(const CalibrationSet& cal, int k) {
  if (cal.task == Task::classification) return sampling::stratified_kfold(cal.X, cal.labels, k);
  return sampling::spxy_kfold(cal.X, cal.y, k);
}

SearchResult two_phase_search(const CalibrationSet& cal, const sampling::FoldAssignment& folds,
                              const ModelSetup& model, const SearchSpace& space, const SearchOptions& opts,
                              AdapterPool* adapters) {
  SearchResult res;
  const auto p1 = enumerate_phase1(space);
  res.phase1.resize(p1.size());
  parallel_for(p1.size(), opts.workers, [&](std::size_t i, int worker) {
    res.phase1[i] = evaluate_pipeline(p1[i], model, cal, folds, opts, adapters, worker);
    res.phase1[i].phase = 1;
  });

  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < res.phase1.size(); ++i)
    if (!res.phase1[i].failed) ok.push_back(i);
  std::stable_sort(ok.begin(), ok.end(), [&](std::size_t a, std::size_t b) {
    return res.phase1[a].best_trial()->loss < res.phase1[b].best_trial()->loss;
  });
  if (ok.size() > static_cast<std::size_t>(space.top_k)) ok.resize(static_cast<std::size_t>(space.top_k));
  res.retained = ok;

  std::vector<PipelineSpec> top;
  for (std::size_t i : ok) top.push_back(res.phase1[i].pipeline);
  std::vector<PipelineSpec> p2;
  if (!top.empty()) p2 = expand_phase2(top, space);
  res.phase2.resize(p2.size());
  std::vector<std::size_t> fresh;
  for (std::size_t j = 0; j < p2.size(); ++j) {
    const auto hit = std::find_if(res.phase1.begin(), res.phase1.end(),
                                  [&](const PipelineResult& r) { return r.pipeline == p2[j]; });
    if (hit != res.phase1.end()) {
      res.phase2[j] = *hit;
      res.phase2[j].phase = 2;
      res.phase2[j].cached = true;
    } else {
      fresh.push_back(j);
    }
  }
  parallel_for(fresh.size(), opts.workers, [&](std::size_t t, int worker) {
    const std::size_t j = fresh[t];
    res.phase2[j] = evaluate_pipeline(p2[j], model, cal, folds, opts, adapters, worker);
    res.phase2[j].phase = 2;
  });

  res.counts.phase1_pipelines = res.phase1.size();
  res.counts.phase2_pipelines = res.phase2.size();
  res.counts.cached_pipelines = p2.size() - fresh.size();
  res.counts.folds = folds.k;
  res.counts.configs_per_pipeline = configs_per_pipeline(model.kind, opts);
  res.physical_pipeline_fold_fits = static_cast<int>((res.phase1.size() + fresh.size()) * static_cast<std::size_t>(folds.k));

  double best = std::numeric_limits<double>::infinity();
  for (int phase = 1; phase <= 2; ++phase) {
    const auto& list = phase == 1 ? res.phase1 : res.phase2;
    for (std::size_t i = 0; i < list.size(); ++i)
      if (!list[i].failed && list[i].best_trial()->loss < best) {
        best = list[i].best_trial()->loss;
        res.best = std::make_pair(phase, i);
      }
  }
  return res;
}

FinalResult finalize(const CalibrationSet& cal, TestSetAccess& test, const ModelSetup& model,
                     const PipelineSpec& pipeline, const PredictorSpec& hyper, AdapterPool* adapters) {
  FinalResult out;
  preproc::PipelineFit fit = preproc::fit_pipeline(pipeline, cal.X, cal.response());
  std::optional<models::FittedPredictor> fp;
  switch (model.kind) {
    case PredictorKind::pls: fp = models::pls_fit(fit.calibration, cal.y, hyper.n_components); break;
    case PredictorKind::plsda:
      fp = models::plsda_fit(fit.calibration, cal.labels, cal.n_classes, hyper.n_components);
      break;
    case PredictorKind::ridge: fp = models::ridge_fit(fit.calibration, cal.y, hyper.alpha); break;
    case PredictorKind::external: break;
  }
  if (fp) out.truncated = fp->truncated();

  const TestSetAccess::View view = test.read("final evaluation: " + model.id + " " + pipeline.to_text());
  const Matrix Xt = fit.pipeline.apply(view.X);
  if (fp) {
    out.predictions = fp->predict(Xt);
  } else {
    if (!adapters) throw ParameterError("external model '" + model.id + "' needs an adapter pool");
    out.predictions = external_predict(adapters->get(0), "final", cal.task, model.external.final_params,
                                       fit.calibration, cal.y, Xt, cal.n_classes);
  }

  if (cal.task == Task::regression) {
    out.test_score = eval::rmse(view.y, out.predictions);
  } else {
    std::vector<int> labels(out.predictions.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(std::lround(out.predictions[i]));
    out.test_score = eval::balanced_accuracy(view.labels, labels);
  }

  RobustnessRecord& rb = out.robustness;
  try {
    const eval::OutlierReport rep = eval::detect_spectral_outliers(cal.X, view.X);
    rb.a95 = rep.a95;
    rb.t2_threshold = rep.threshold;
    rb.n_out = rep.outliers.size();
    rb.n_excluded = rep.excluded_test.size();
    if (cal.task == Task::regression) rb.rmsep_out = eval::subset_rmse(view.y, out.predictions, rep.outliers);
  } catch (const Error& e) {
    rb.note = std::string("outlier analysis skipped: ") + e.what();
  }
  if (cal.task == Task::regression) {
    const auto extra = eval::extrapolation_indices(cal.y, view.y);
    rb.n_extra = extra.size();
    rb.rmsep_extra = eval::subset_rmse(view.y, out.predictions, extra);
  }
  return out;
}

SearchOutcome run_cell(const Dataset& ds, const std::string& model_id,
                       const std::map<std::string, ExternalModelConfig>& externals, const SearchOptions& opts_in) {
  SearchOutcome oc;
  oc.dataset = ds.name;
  oc.database = ds.database;
  oc.model = model_id;
  oc.task = ds.task;
  oc.p = ds.p();

  const std::optional<ModelSetup> model = resolve_model(model_id, ds.task, externals);
  if (!model) {
    oc.status = "unsupported";
    oc.error = model_id + " does not apply to " + std::string(to_string(ds.task));
    return oc;
  }
  if (model->kind == PredictorKind::external && model->external.command.empty()) {
    oc.status = "unavailable";
    oc.error = "no adapter configured for " + model_id;
    return oc;
  }

  SearchOptions opts = opts_in;
  opts.seed = stable_hash(ds.name + "/" + model_id, opts_in.seed);
  const SearchSpace space = SearchSpace::for_family(opts.family.value_or(default_family(model->kind)));

  std::optional<AdapterPool> pool;
  try {
    const SplitIndices split = resolve_split(ds);
    const CalibrationSet cal = calibration_set(ds, split.train);
    oc.n_cal = split.train.size();
    oc.n_test = split.test.size();
    TestSetAccess test(ds, split.test);
    const sampling::FoldAssignment folds = make_folds(cal, opts.folds);
    oc.fold_of = folds.fold_of;

    if (model->kind == PredictorKind::external) {
      pool.emplace(model_id, model->external, opts.workers);
      try {
        pool->get(0);
      } catch (const bridge::BridgeError& e) {
        oc.status = "unavailable";
        oc.error = e.what();
        return oc;
      }
    }

    oc.search = two_phase_search(cal, folds, *model, space, opts, pool ? &*pool : nullptr);
    const PipelineResult* best = oc.search.best_pipeline();
    if (!best) {
      std::string why = "every pipeline failed";
      if (!oc.search.phase1.empty() && !oc.search.phase1.front().error.empty())
        why += " (first: " + oc.search.phase1.front().error + ")";
      throw DegenerateInput(why);
    }
    const TrialRecord& bt = *best->best_trial();
    oc.pipeline = best->pipeline.to_text();
    oc.hyperparams = bt.hyperparams;
    oc.cv_score = bt.mean_score;

    const FinalResult fr = finalize(cal, test, *model, best->pipeline, bt.spec, pool ? &*pool : nullptr);
    oc.test_score = fr.test_score;
    oc.truncated = fr.truncated;
    oc.robustness = fr.robustness;
    oc.test_audit = test.log();
  } catch (const std::exception& e) {
    oc.status = "failed";
    oc.error = e.what();
  }
  if (pool) pool->shutdown_all();
  return oc;
}

}  // namespace nirs::search
