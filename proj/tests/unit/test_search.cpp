#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "nirs/error.hpp"
#include "nirs/search.hpp"

using namespace nirs;
using namespace nirs::search;

TEST_CASE("search space sizes") {
  const auto lin = SearchSpace::linear();
  const auto tab = SearchSpace::tabular();
  CHECK(enumerate_phase1(tab).size() == 21);
  CHECK(enumerate_phase1(lin).size() == 24);
  const auto c1 = planned_counts(tab, 3, 1);
  CHECK(c1.total_pipelines() == 30);
  CHECK(c1.pipeline_fold_fits() == 90);
  const auto c2 = planned_counts(lin, 3, 30);
  CHECK(c2.total_pipelines() == 60);
  CHECK(c2.fit_operations() == 5400);
  CHECK(enumerate_phase1(lin).front().steps.empty());
  std::set<std::string> texts;
  for (const auto& p : enumerate_phase1(lin)) texts.insert(p.to_text());
  CHECK(texts.size() == 24);
}

TEST_CASE("phase-2 expansion keeps retention order") {
  const auto lin = SearchSpace::linear();
  const auto top = std::vector<preproc::PipelineSpec>{enumerate_phase1(lin)[5], enumerate_phase1(lin)[2]};
  const auto p2 = expand_phase2(top, lin);
  CHECK(p2.size() == 2 * 4 * 3);
  CHECK(p2.front() == top[0]);  // none x none
  CHECK(p2[12] == top[1]);
}

TEST_CASE("list-pipelines output") {
  const std::string tab = list_pipelines(SearchFamily::tabular);
  CHECK(tab.find("phase1: 7 x 3 = 21") != std::string::npos);
  CHECK(tab.find("phase2: top-3 × 3\n") != std::string::npos);
  const std::string lin = list_pipelines(SearchFamily::linear);
  CHECK(lin.find("phase2: top-3 × 4 × 3") != std::string::npos);
  std::istringstream is(lin);
  std::string line;
  int phase1_lines = 0;
  bool in_phase1 = false;
  while (std::getline(is, line)) {
    if (line.rfind("phase1:", 0) == 0) {
      in_phase1 = true;
      continue;
    }
    if (line.rfind("phase2:", 0) == 0) in_phase1 = false;
    if (in_phase1) ++phase1_lines;
  }
  CHECK(phase1_lines == 24);
}

TEST_CASE("portable generators") {
  std::mt19937_64 a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    const double u = uniform01(a);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  double s = 0, s2 = 0;
  for (int i = 0; i < 20000; ++i) {
    const double z = standard_normal(b);
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / 20000) < 0.05);
  CHECK(std::abs(s2 / 20000 - 1.0) < 0.05);
  CHECK(stable_hash("") == 14695981039346656037ull);
  CHECK(stable_hash("a") == 0xaf63dc4c8601ec8cull);
  CHECK(stable_hash("a", 1) != stable_hash("a", 2));
}

TEST_CASE("parzen density") {
  const auto d = ParzenDensity::fit({0.0, 1.0, 2.0}, 0.5);
  CHECK(d.bandwidth == doctest::Approx(1.06 * 1.0 * std::pow(3.0, -0.2)));
  CHECK(d.log_pdf(1.0) > d.log_pdf(5.0));
  const auto single = ParzenDensity::fit({3.0}, 0.5);
  CHECK(single.bandwidth == 0.5);
}

TEST_CASE("tpe is deterministic, bounded and exploits good regions") {
  TpeConfig cfg;
  std::vector<TpeObservation> h1, h2;
  auto objective = [](double x) { return (x - 1.5) * (x - 1.5); };
  for (int t = 0; t < 30; ++t) {
    const double x1 = tpe_suggest(h1, cfg, 77, t);
    const double x2 = tpe_suggest(h2, cfg, 77, t);
    CHECK(x1 == x2);
    CHECK(x1 >= cfg.lower);
    CHECK(x1 <= cfg.upper);
    h1.push_back({x1, objective(x1)});
    h2.push_back({x2, objective(x2)});
  }
  // Startup trials cover the range; later trials concentrate near the optimum.
  double late = 0;
  for (int t = 20; t < 30; ++t) late += std::abs(h1[static_cast<std::size_t>(t)].x - 1.5);
  double early = 0;
  for (int t = 0; t < 10; ++t) early += std::abs(h1[static_cast<std::size_t>(t)].x - 1.5);
  CHECK(late < early);
  CHECK(tpe_suggest({}, cfg, 1, 0) != tpe_suggest({}, cfg, 2, 0));
}

TEST_CASE("model resolution") {
  const auto ext = default_external_models();
  CHECK(resolve_model("pls", Task::classification, ext)->kind == models::PredictorKind::plsda);
  CHECK_FALSE(resolve_model("ridge", Task::classification, ext).has_value());
  CHECK_FALSE(resolve_model("plsda", Task::regression, ext).has_value());
  CHECK(resolve_model("tabpfn", Task::regression, ext)->kind == models::PredictorKind::external);
  CHECK_THROWS_AS(resolve_model("svm", Task::regression, ext), ConfigError);
  CHECK(default_family(models::PredictorKind::external) == SearchFamily::tabular);
  CHECK(default_family(models::PredictorKind::ridge) == SearchFamily::linear);
}

TEST_CASE("test set access is audited") {
  const Dataset ds = testing::linear_dataset("a", 20, 6, 1);
  TestSetAccess t(ds, {1, 5});
  CHECK(t.reads() == 0);
  const auto v = t.read("final");
  CHECK(v.X.rows() == 2);
  CHECK(v.y[1] == ds.y.values[5]);
  CHECK(t.log() == std::vector<std::string>{"final"});
}

TEST_CASE("pls search on a small dataset") {
  const Dataset ds = testing::linear_dataset("lin", 40, 32, 3);
  SearchOptions o;
  o.seed = 5;
  const SearchOutcome oc = run_cell(ds, "pls", {}, o);
  REQUIRE(oc.status == "ok");
  CHECK(oc.search.phase1.size() == 24);
  CHECK(oc.search.phase2.size() == 36);
  CHECK(oc.search.counts.total_pipelines() == 60);
  CHECK(oc.search.counts.fit_operations() == 5400);
  CHECK(oc.search.physical_pipeline_fold_fits == (24 + 36 - 3) * 3);
  CHECK(oc.test_audit.size() == 1);
  CHECK(oc.n_cal == 30);
  CHECK(oc.n_test == 10);
  CHECK(oc.test_score < 0.5);  // y spans [0, 10]
  for (const auto& pr : oc.search.phase1) CHECK(pr.trials.size() == 30);
  // Same seed, different worker count: same choice.
  o.workers = 3;
  const SearchOutcome again = run_cell(ds, "pls", {}, o);
  CHECK(again.pipeline == oc.pipeline);
  CHECK(again.hyperparams == oc.hyperparams);
  CHECK(again.test_score == oc.test_score);
}

TEST_CASE("ridge search is reproducible") {
  const Dataset ds = testing::linear_dataset("lin", 30, 16, 4);
  SearchOptions o;
  o.seed = 9;
  const auto a = run_cell(ds, "ridge", {}, o);
  const auto b = run_cell(ds, "ridge", {}, o);
  REQUIRE(a.status == "ok");
  CHECK(a.hyperparams.rfind("alpha=", 0) == 0);
  CHECK(a.hyperparams == b.hyperparams);
  CHECK(a.cv_score == b.cv_score);
  for (const auto& pr : a.search.phase1)
    if (!pr.failed) CHECK(pr.trials.size() == 30);
}

TEST_CASE("classification cells") {
  const Dataset ds = testing::class_dataset("cls", 12, 24, 3, 2);
  SearchOptions o;
  const auto oc = run_cell(ds, "pls", {}, o);
  REQUIRE(oc.status == "ok");
  CHECK(oc.test_score == doctest::Approx(1.0));
  CHECK(oc.cv_score > 0.9);
  CHECK(run_cell(ds, "ridge", {}, o).status == "unsupported");
}

TEST_CASE("external models through the mock adapter") {
  const Dataset ds = testing::linear_dataset("ext", 30, 16, 6);
  std::map<std::string, ExternalModelConfig> ext;
  ext["mock"].command = {NIRS_MOCK_ADAPTER, "mean"};
  ext["missing"].command = {"/nonexistent/adapter"};
  ext["tabpfn"] = {};
  SearchOptions o;
  const auto oc = run_cell(ds, "mock", ext, o);
  REQUIRE(oc.status == "ok");
  CHECK(oc.search.phase1.size() == 21);
  CHECK(oc.search.phase2.size() == 9);
  CHECK(oc.search.counts.pipeline_fold_fits() == 90);
  CHECK(oc.hyperparams == "fixed");
  CHECK(oc.test_audit.size() == 1);
  CHECK(run_cell(ds, "missing", ext, o).status == "unavailable");
  CHECK(run_cell(ds, "tabpfn", ext, o).status == "unavailable");
  ext["mock"].command = {NIRS_MOCK_ADAPTER, "nan"};
  const auto bad = run_cell(ds, "mock", ext, o);
  CHECK(bad.status == "failed");
  CHECK(bad.error.find("non-finite prediction") != std::string::npos);
}
