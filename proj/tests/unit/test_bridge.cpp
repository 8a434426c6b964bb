#include <doctest.h>

#include <chrono>
#include <cmath>

#include "fixtures.hpp"
#include "nirs/bridge.hpp"
#include "nirs/search.hpp"

using namespace nirs;
using namespace nirs::bridge;
using namespace std::chrono_literals;

namespace {

std::vector<std::string> mock(const std::string& mode) { return {NIRS_MOCK_ADAPTER, mode}; }

AdapterTimeouts quick() {
  AdapterTimeouts t;
  t.handshake = 2000ms;
  t.call = 1000ms;
  t.shutdown_grace = 1000ms;
  return t;
}

BridgeError::Kind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const BridgeError& e) {
    return e.kind();
  }
  FAIL("expected BridgeError");
  return BridgeError::Kind::closed;
}

}  // namespace

TEST_CASE("handshake and fit_predict round trip") {
  ExternalModel m = ExternalModel::spawn("mock", mock("mean"), quick());
  CHECK(m.alive());
  CHECK(m.capabilities().supports(Task::regression));
  CHECK(m.capabilities().supports(Task::classification));
  const Matrix X = testing::random_matrix(5, 3, 1);
  const Matrix Q = testing::random_matrix(3, 3, 2);
  FitPredictRequest r;
  r.run_id = "t";
  r.x = &X;
  r.q = &Q;
  r.y = {1, 2, 3, 4, 5.5};
  const auto pred = m.fit_predict(r);
  REQUIRE(pred.size() == 3);
  for (double v : pred) CHECK(v == doctest::Approx(3.1));
  CHECK(m.shutdown() == std::optional<int>(0));
  CHECK(m.shutdown() == std::optional<int>(0));  // idempotent
  CHECK_FALSE(m.alive());
}

TEST_CASE("nearest-neighbour mock returns training targets exactly") {
  ExternalModel m = ExternalModel::spawn("mock", mock("nn1"), quick());
  const Matrix X = testing::random_matrix(6, 4, 3);
  FitPredictRequest r;
  r.x = &X;
  r.q = &X;
  r.y = testing::random_vector(6, 4);
  CHECK(m.fit_predict(r) == r.y);
}

TEST_CASE("protocol failures") {
  const Matrix X = testing::random_matrix(4, 2, 1);
  FitPredictRequest r;
  r.x = &X;
  r.q = &X;
  r.y = {1, 2, 3, 4};

  SUBCASE("non-finite predictions") {
    ExternalModel m = ExternalModel::spawn("mock", mock("nan"), quick());
    try {
      m.fit_predict(r);
      FAIL("expected BridgeError");
    } catch (const BridgeError& e) {
      CHECK(e.kind() == BridgeError::Kind::protocol);
      CHECK(std::string(e.what()).find("non-finite prediction") != std::string::npos);
    }
    CHECK_FALSE(m.alive());
  }
  SUBCASE("adapter reports an error") {
    ExternalModel m = ExternalModel::spawn("mock", mock("error"), quick());
    CHECK(kind_of([&] { m.fit_predict(r); }) == BridgeError::Kind::adapter);
    CHECK(m.alive());  // an error reply keeps the stream in step
  }
  SUBCASE("version mismatch") {
    CHECK(kind_of([] { ExternalModel::spawn("mock", mock("bad_version"), quick()); }) ==
          BridgeError::Kind::incompatible);
  }
  SUBCASE("handshake timeout") {
    const auto t0 = std::chrono::steady_clock::now();
    AdapterTimeouts t = quick();
    t.handshake = 300ms;
    CHECK(kind_of([&] { ExternalModel::spawn("mock", mock("hang"), t); }) == BridgeError::Kind::timeout);
    CHECK(std::chrono::steady_clock::now() - t0 < 5s);
  }
  SUBCASE("call timeout kills the adapter") {
    AdapterTimeouts t = quick();
    t.call = 300ms;
    ExternalModel m = ExternalModel::spawn("mock", mock("hang-on-fit"), t);
    CHECK(kind_of([&] { m.fit_predict(r); }) == BridgeError::Kind::timeout);
    CHECK_FALSE(m.alive());
    CHECK(kind_of([&] { m.fit_predict(r); }) == BridgeError::Kind::closed);
  }
  SUBCASE("adapter exits mid-call") {
    ExternalModel m = ExternalModel::spawn("mock", mock("crash-on-fit"), quick());
    CHECK(kind_of([&] { m.fit_predict(r); }) == BridgeError::Kind::closed);
  }
  SUBCASE("missing executable") {
    try {
      ExternalModel::spawn("mock", {"/nonexistent/adapter"}, quick());
      FAIL("expected BridgeError");
    } catch (const BridgeError& e) {
      CHECK(e.kind() == BridgeError::Kind::spawn);
      CHECK(std::string(e.what()).find("/nonexistent/adapter") != std::string::npos);
    }
  }
}

TEST_CASE("wire encoding") {
  const Matrix X = Matrix::from_rows({{1, 2}, {3, 4}});
  FitPredictRequest r;
  r.run_id = "cell/1";
  r.task = Task::classification;
  r.x = &X;
  r.q = &X;
  r.y = {0, 1};
  const auto j = nlohmann::json::parse(encode_fit_predict(r));
  CHECK(j["v"] == kProtocolVersion);
  CHECK(j["op"] == "fit_predict");
  CHECK(j["task"] == "classification");
  CHECK(j["x"] == nlohmann::json({1, 2, 3, 4}));
  CHECK(j["y"][1].is_number_integer());
  r.y = {0, std::nan("")};
  CHECK_THROWS_AS(encode_fit_predict(r), DataError);

  CHECK(decode_fit_predict(R"({"v":1,"status":"ok","predictions":[1.5,2]})", 2).predictions ==
        std::vector<double>{1.5, 2});
  CHECK_THROWS_AS(decode_fit_predict(R"({"v":1,"status":"ok","predictions":[1.5]})", 2), BridgeError);
  CHECK_THROWS_AS(decode_fit_predict(R"({"v":1,"status":"ok","predictions":["NaN"]})", 1), BridgeError);
  CHECK_THROWS_AS(decode_fit_predict("not json", 1), BridgeError);
  CHECK_FALSE(decode_fit_predict(R"({"v":1,"status":"error","error":"oom"})", 1).ok);
  CHECK_THROWS_AS(decode_handshake(R"({"v":1,"status":"ok","tasks":["ranking"]})"), BridgeError);
}

TEST_CASE("adapter pool respawns broken workers") {
  ExternalModelConfig cfg;
  cfg.command = mock("mean");
  cfg.timeout_s = 2;
  cfg.handshake_timeout_s = 2;
  search::AdapterPool pool("mock", cfg, 2);
  ExternalModel& a = pool.get(0);
  CHECK(a.alive());
  pool.get(1);
  CHECK(pool.spawned() == 2);
  a.shutdown();
  CHECK(pool.get(0).alive());
  CHECK(pool.spawned() == 3);
  pool.shutdown_all();
}
