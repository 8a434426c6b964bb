#include <doctest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "fixtures.hpp"
#include "nirs/csv.hpp"
#include "nirs/dataset.hpp"
#include "nirs/error.hpp"
#include "nirs/manifest.hpp"
#include "nirs/thread_pool.hpp"

using namespace nirs;
using nlohmann::json;

TEST_CASE("matrix helpers") {
  const Matrix m = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.column(1) == std::vector<double>{2, 5});
  CHECK(m.column_means() == std::vector<double>{2.5, 3.5, 4.5});
  const Matrix t = m.transpose();
  CHECK(t(2, 1) == 6);
  const std::vector<std::size_t> idx{1};
  CHECK(m.select_rows(idx).row(0)[0] == 4);
  CHECK(times(m, std::vector<double>{1, 0, -1}) == std::vector<double>{-2, -2});
  CHECK(transpose_times(m, std::vector<double>{1, 1}) == std::vector<double>{5, 7, 9});
  const Matrix g = gram_rows(m);
  CHECK(g(0, 1) == 32);
  CHECK(g(1, 0) == 32);
  Matrix c = m;
  center_rows(c, m.column_means());
  CHECK(c(0, 0) == -1.5);
  Matrix bad = m;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(bad.all_finite());
  CHECK_THROWS(Matrix::from_rows({{1, 2}, {3}}));
}

TEST_CASE("csv reader handles quoting") {
  const auto t = csv::parse("a,b\n\"x,1\",\"say \"\"hi\"\"\"\n2,\"multi\nline\"\n\n");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  CHECK(t.rows[0][0] == "x,1");
  CHECK(t.rows[0][1] == "say \"hi\"");
  CHECK(t.rows[1][1] == "multi\nline");
  CHECK(csv::escape("plain") == "plain");
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::join_row({"a", "b\"c"}) == "a,\"b\"\"c\"");
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5e17, 0.0}) {
    double back = 0.0;
    REQUIRE(csv::parse_double(csv::format_double(v), back));
    CHECK(back == v);
  }
  CHECK(csv::format_double(0.25) == "0.25");
  CHECK(csv::format_fixed(0.8181818, 3) == "0.818");
  CHECK(csv::format_fixed(0.8260869, 3) == "0.826");
  double v = 0.0;
  CHECK_FALSE(csv::parse_double("abc", v));
  CHECK_FALSE(csv::parse_double("1.0x", v));
}

TEST_CASE("dataset ingestion") {
  DatasetEntry e;
  e.name = "toy";
  e.database = "db";
  e.target = "y";
  SUBCASE("wavelength header and regression target") {
    const Dataset ds = parse_dataset("1000,1002,y,1004\n0.1,0.2,5,0.3\n0.4,0.5,6,0.6\n", e);
    CHECK(ds.n() == 2);
    CHECK(ds.p() == 3);
    CHECK(ds.X.wavelengths() == std::vector<double>{1000, 1002, 1004});
    CHECK(ds.y.values == std::vector<double>{5, 6});
    CHECK(ds.X.values()(1, 2) == 0.6);
  }
  SUBCASE("non-numeric cell names its coordinates") {
    try {
      parse_dataset("a,b,y\n0.1,0.2,1\n0.3,oops,2\n", e);
      FAIL("expected DataError");
    } catch (const DataError& err) {
      CHECK(std::string(err.what()).find("(1, 1)") != std::string::npos);
    }
  }
  SUBCASE("missing target") { CHECK_THROWS_AS(parse_dataset("a,b\n1,2\n", e), DataError); }
  SUBCASE("NaN absorbance") { CHECK_THROWS_AS(parse_dataset("a,y\nnan,1\n", e), DataError); }
  SUBCASE("labels become dense ids in order of appearance") {
    e.task = Task::classification;
    const Dataset ds = parse_dataset("a,y\n1,cat\n2,dog\n3,cat\n", e);
    CHECK(ds.y.labels == std::vector<int>{0, 1, 0});
    CHECK(ds.y.label_names == std::vector<std::string>{"cat", "dog"});
  }
}

TEST_CASE("dataset CSV round trip") {
  const Dataset ds = testing::linear_dataset("rt", 12, 5, 3);
  DatasetEntry e;
  e.name = "rt";
  e.database = "rt";
  e.target = "y";
  const Dataset back = parse_dataset(dataset_to_csv(ds, "y"), e);
  CHECK(back.X.values() == ds.X.values());
  CHECK(back.y.values == ds.y.values);
}

TEST_CASE("computed split sizes") {
  CHECK(computed_train_size(100, 0.25) == 75);
  CHECK(computed_train_size(10, 0.25) == 8);
  CHECK(computed_train_size(7, 0.3) == 5);
  Dataset ds = testing::linear_dataset("s", 40, 6, 1);
  const SplitIndices s = resolve_split(ds);
  CHECK(s.train.size() == 30);
  CHECK(s.test.size() == 10);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 40);
  ds.split.method = SplitMethod::predefined;
  ds.split.train_indices = {0, 1, 2};
  ds.split.test_indices = {2, 3};
  CHECK_THROWS(resolve_split(ds));  // overlapping indices
}

TEST_CASE("manifest parsing") {
  testing::TempDir dir("manifest");
  testing::write_file(dir.path() / "a.csv", "f0,f1,y\n1,2,3\n4,5,6\n");
  json doc = {{"models", {"pls", "ridge"}},
              {"seed", 7},
              {"datasets", {{{"name", "a"}, {"path", "a.csv"}, {"split", {{"method", "spxy"}}}}}}};
  SUBCASE("valid") {
    const auto m = parse_manifest(doc, dir.path());
    CHECK(m.seed == 7);
    CHECK(m.folds == 3);
    CHECK(m.search_space == SearchFamily::automatic);
    REQUIRE(m.datasets.size() == 1);
    CHECK(m.datasets[0].database == "a");
    CHECK(m.datasets[0].path == dir.path() / "a.csv");
    CHECK(m.external_models.count("tabpfn") == 1);
  }
  SUBCASE("unknown model") {
    doc["models"] = {"pls", "svm"};
    CHECK_THROWS_AS(parse_manifest(doc, dir.path()), ConfigError);
  }
  SUBCASE("missing split") {
    doc["datasets"][0].erase("split");
    CHECK_THROWS_AS(parse_manifest(doc, dir.path()), ConfigError);
  }
  SUBCASE("missing file") {
    doc["datasets"][0]["path"] = "nope.csv";
    CHECK_THROWS_AS(parse_manifest(doc, dir.path()), ConfigError);
  }
  SUBCASE("bad family") {
    doc["search_space"] = "quadratic";
    CHECK_THROWS_AS(parse_manifest(doc, dir.path()), ConfigError);
  }
  SUBCASE("external adapter command") {
    doc["external_models"] = {{"mock", {{"command", {"/bin/true"}}, {"timeout_s", 3}}}};
    doc["models"] = {"mock"};
    const auto m = parse_manifest(doc, dir.path());
    CHECK(m.external_models.at("mock").command == std::vector<std::string>{"/bin/true"});
    CHECK(m.external_models.at("mock").timeout_s == 3.0);
  }
  SUBCASE("external id may not shadow a built-in") {
    doc["external_models"] = {{"pls", {{"command", {"/bin/true"}}}}};
    CHECK_THROWS_AS(parse_manifest(doc, dir.path()), ConfigError);
  }
}

TEST_CASE("parallel_for runs every task once and rethrows") {
  for (int workers : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(hits.size(), workers, [&](std::size_t t, int w) {
      CHECK(w >= 0);
      CHECK(w < workers);
      hits[t]++;
    });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  CHECK_THROWS_AS(parallel_for(10, 2,
                               [](std::size_t t, int) {
                                 if (t == 4) throw DataError("boom");
                               }),
                  DataError);
}

TEST_CASE("benchmark summary medians") {
  std::vector<Dataset> v{testing::linear_dataset("a", 10, 4, 1), testing::linear_dataset("b", 20, 8, 2),
                         testing::class_dataset("c", 5, 6, 2, 3)};
  v[1].database = "a";
  const auto s = summarize_datasets(v);
  CHECK(s.datasets == 3);
  CHECK(s.databases == 2);
  CHECK(s.regression.datasets == 2);
  CHECK(s.regression.median_n == 15.0);
  CHECK(s.classification.median_p == 6.0);
}
