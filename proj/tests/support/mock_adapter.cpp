// Test adapter speaking the JSON-lines protocol. Behaviour by argv[1]:
// mean, nn1, nan, error, bad_version, hang, hang-on-fit, crash-on-fit.
#include <chrono>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <thread>

#include <json.hpp>

using nlohmann::json;

namespace {

void sleep_forever() {
  for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
}

void send(const json& j) {
  std::cout << j.dump() << "\n";
  std::cout.flush();
}

json predict(const std::string& mode, const json& req) {
  const auto n = req.at("n_rows").get<std::size_t>();
  const auto p = req.at("n_cols").get<std::size_t>();
  const auto m = req.at("q_rows").get<std::size_t>();
  const auto& x = req.at("x");
  const auto& y = req.at("y");
  const auto& q = req.at("q");
  const bool cls = req.at("task").get<std::string>() == "classification";
  json preds = json::array();
  if (mode == "nan") {
    for (std::size_t i = 0; i < m; ++i) preds.push_back(nullptr);
    return preds;
  }
  if (mode == "nn1") {
    for (std::size_t i = 0; i < m; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t r = 0; r < n; ++r) {
        double d = 0.0;
        for (std::size_t c = 0; c < p; ++c) {
          const double diff = x[r * p + c].get<double>() - q[i * p + c].get<double>();
          d += diff * diff;
        }
        if (d < best) {
          best = d;
          arg = r;
        }
      }
      preds.push_back(y[arg]);
    }
    return preds;
  }
  // mean: training mean, or the majority label (lowest id on ties).
  double value = 0.0;
  if (cls) {
    std::map<long long, int> counts;
    for (const auto& v : y) ++counts[v.get<long long>()];
    int best = -1;
    for (const auto& [label, c] : counts)
      if (c > best) {
        best = c;
        value = static_cast<double>(label);
      }
  } else {
    for (const auto& v : y) value += v.get<double>();
    value /= static_cast<double>(n);
  }
  for (std::size_t i = 0; i < m; ++i) preds.push_back(value);
  return preds;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "mean";
  std::string line;
  while (std::getline(std::cin, line)) {
    const json req = json::parse(line, nullptr, false);
    if (req.is_discarded()) {
      send({{"v", 1}, {"status", "error"}, {"error", "malformed request"}});
      continue;
    }
    const std::string op = req.value("op", "");
    if (op == "handshake") {
      if (mode == "hang") sleep_forever();
      send({{"v", mode == "bad_version" ? 2 : 1},
            {"status", "ok"},
            {"tasks", {"regression", "classification"}},
            {"diagnostics", "mock " + mode}});
    } else if (op == "fit_predict") {
      if (mode == "hang-on-fit") sleep_forever();
      if (mode == "crash-on-fit") return 3;
      if (mode == "error") {
        send({{"v", 1}, {"status", "error"}, {"error", "mock failure"}});
        continue;
      }
      send({{"v", 1}, {"status", "ok"}, {"predictions", predict(mode, req)}});
    } else if (op == "shutdown") {
      return 0;
    } else {
      send({{"v", 1}, {"status", "error"}, {"error", "unknown op"}});
    }
  }
  return 0;
}
