#include <cmath>

#include "nirs/bridge.hpp"

namespace nirs::bridge {

using nlohmann::json;

std::string_view to_string(BridgeError::Kind k) {
  switch (k) {
    case BridgeError::Kind::spawn: return "spawn";
    case BridgeError::Kind::timeout: return "timeout";
    case BridgeError::Kind::incompatible: return "incompatible";
    case BridgeError::Kind::protocol: return "protocol";
    case BridgeError::Kind::adapter: return "adapter";
    case BridgeError::Kind::closed: return "closed";
  }
  return "unknown";
}

bool Capabilities::supports(Task t) const {
  for (Task x : tasks)
    if (x == t) return true;
  return false;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (double v : m.data()) out.push_back(v);
  return out;
}

std::string encode_handshake(const std::string& run_id, const std::string& model_id) {
  return json{{"v", kProtocolVersion}, {"op", "handshake"}, {"run_id", run_id}, {"model_id", model_id}}.dump();
}

std::string encode_shutdown(const std::string& run_id) {
  return json{{"v", kProtocolVersion}, {"op", "shutdown"}, {"run_id", run_id}}.dump();
}

std::string encode_fit_predict(const FitPredictRequest& r) {
  if (!r.x || !r.q) throw ParameterError("fit_predict request needs calibration and query matrices");
  if (r.x->rows() != r.y.size()) throw DataError("fit_predict: calibration rows and targets differ");
  if (r.x->cols() != r.q->cols()) throw DataError("fit_predict: calibration and query feature counts differ");
  if (!r.x->all_finite() || !r.q->all_finite()) throw DataError("fit_predict: non-finite input matrix");
  for (double v : r.y)
    if (!std::isfinite(v)) throw DataError("fit_predict: non-finite target");
  json y = json::array();
  for (double v : r.y) {
    if (r.task == Task::classification) y.push_back(static_cast<long long>(v));
    else y.push_back(v);
  }
  json msg{{"v", kProtocolVersion},
           {"op", "fit_predict"},
           {"run_id", r.run_id},
           {"task", std::string(to_string(r.task))},
           {"fixed_params", r.fixed_params},
           {"n_rows", r.x->rows()},
           {"n_cols", r.x->cols()},
           {"x", matrix_to_json(*r.x)},
           {"y", std::move(y)},
           {"q_rows", r.q->rows()},
           {"q_cols", r.q->cols()},
           {"q", matrix_to_json(*r.q)}};
  return msg.dump();
}

namespace {

json parse_line(std::string_view line) {
  json msg = json::parse(line, nullptr, false);
  if (msg.is_discarded() || !msg.is_object())
    throw BridgeError(BridgeError::Kind::protocol, "malformed response line: " + std::string(line.substr(0, 200)));
  return msg;
}

void check_version(const json& msg) {
  if (!msg.contains("v") || !msg["v"].is_number_integer())
    throw BridgeError(BridgeError::Kind::protocol, "response without protocol version");
  const int v = msg["v"].get<int>();
  if (v != kProtocolVersion)
    throw BridgeError(BridgeError::Kind::incompatible, "adapter speaks protocol v" + std::to_string(v) +
                                                           ", engine requires v" + std::to_string(kProtocolVersion));
}

std::string text_field(const json& msg, const char* key) {
  if (msg.contains(key) && msg[key].is_string()) return msg[key].get<std::string>();
  return {};
}

}  // namespace

Capabilities decode_handshake(std::string_view line) {
  const json msg = parse_line(line);
  check_version(msg);
  const std::string status = text_field(msg, "status");
  if (status != "ok") {
    const std::string err = text_field(msg, "error");
    throw BridgeError(BridgeError::Kind::adapter, "handshake refused: " + (err.empty() ? status : err));
  }
  Capabilities caps;
  caps.diagnostics = text_field(msg, "diagnostics");
  if (!msg.contains("tasks") || !msg["tasks"].is_array())
    throw BridgeError(BridgeError::Kind::protocol, "handshake reply lacks a task list");
  for (const auto& t : msg["tasks"]) {
    if (!t.is_string()) throw BridgeError(BridgeError::Kind::protocol, "task names must be strings");
    try {
      caps.tasks.push_back(parse_task(t.get<std::string>()));
    } catch (const Error&) {
      throw BridgeError(BridgeError::Kind::protocol, "unknown task '" + t.get<std::string>() + "'");
    }
  }
  return caps;
}

BridgeResult decode_fit_predict(std::string_view line, std::size_t expected_rows) {
  const json msg = parse_line(line);
  check_version(msg);
  BridgeResult r;
  r.diagnostics = text_field(msg, "diagnostics");
  const std::string status = text_field(msg, "status");
  if (status == "error") {
    r.ok = false;
    r.error = text_field(msg, "error");
    return r;
  }
  if (status != "ok") throw BridgeError(BridgeError::Kind::protocol, "unknown response status '" + status + "'");
  if (!msg.contains("predictions") || !msg["predictions"].is_array())
    throw BridgeError(BridgeError::Kind::protocol, "ok response without predictions");
  const auto& preds = msg["predictions"];
  if (preds.size() != expected_rows)
    throw BridgeError(BridgeError::Kind::protocol, "expected " + std::to_string(expected_rows) +
                                                       " predictions, got " + std::to_string(preds.size()));
  r.predictions.reserve(preds.size());
  for (const auto& p : preds) {
    // JSON has no NaN; adapters typically emit null or a "NaN" string.
    if (p.is_null() || p.is_string()) throw BridgeError(BridgeError::Kind::protocol, "non-finite prediction");
    if (!p.is_number()) throw BridgeError(BridgeError::Kind::protocol, "non-numeric prediction");
    const double v = p.get<double>();
    if (!std::isfinite(v)) throw BridgeError(BridgeError::Kind::protocol, "non-finite prediction");
    r.predictions.push_back(v);
  }
  r.ok = true;
  return r;
}

}  // namespace nirs::bridge
