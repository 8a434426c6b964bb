#include "nirs/bridge.hpp"

namespace nirs::bridge {

ExternalModel::~ExternalModel() { shutdown(); }

ExternalModel ExternalModel::spawn(const std::string& model_id, const std::vector<std::string>& command,
                                   AdapterTimeouts timeouts) {
  if (command.empty())
    throw BridgeError(BridgeError::Kind::spawn, "model '" + model_id + "' unavailable: no adapter command");
  ExternalModel m;
  m.model_id_ = model_id;
  m.timeouts_ = timeouts;
  m.process_ = Subprocess::spawn(command);
  if (!m.process_.write_line(encode_handshake("handshake", model_id)))
    throw BridgeError(BridgeError::Kind::spawn, "adapter '" + command[0] + "' closed its input");
  const auto line = m.process_.read_line(timeouts.handshake);
  if (!line) {
    const bool ended = m.process_.eof();
    m.process_.kill();
    if (ended) throw BridgeError(BridgeError::Kind::spawn, "adapter '" + command[0] + "' exited during handshake");
    throw BridgeError(BridgeError::Kind::timeout, "adapter '" + command[0] + "' handshake timed out");
  }
  try {
    m.caps_ = decode_handshake(*line);
  } catch (...) {
    m.process_.kill();
    throw;
  }
  return m;
}

std::vector<double> ExternalModel::fit_predict(const FitPredictRequest& request) {
  if (!alive()) throw BridgeError(BridgeError::Kind::closed, "adapter for '" + model_id_ + "' is not running");
  if (!caps_.supports(request.task))
    throw BridgeError(BridgeError::Kind::incompatible,
                      "adapter for '" + model_id_ + "' does not support " + std::string(to_string(request.task)));
  const std::string line = encode_fit_predict(request);
  ++calls_;
  if (!process_.write_line(line)) {
    broken_ = true;
    process_.kill();
    throw BridgeError(BridgeError::Kind::closed, "adapter for '" + model_id_ + "' closed its input");
  }
  const auto reply = process_.read_line(timeouts_.call);
  if (!reply) {
    broken_ = true;
    const bool ended = process_.eof();
    process_.kill();
    if (ended) throw BridgeError(BridgeError::Kind::closed, "adapter for '" + model_id_ + "' exited mid-call");
    throw BridgeError(BridgeError::Kind::timeout, "adapter for '" + model_id_ + "' timed out");
  }
  BridgeResult r;
  try {
    r = decode_fit_predict(*reply, request.q->rows());
  } catch (const BridgeError&) {
    // The stream may be out of step after a bad line.
    broken_ = true;
    process_.kill();
    throw;
  }
  if (!r.ok) throw BridgeError(BridgeError::Kind::adapter, r.error);
  return std::move(r.predictions);
}

std::optional<int> ExternalModel::shutdown() {
  if (!process_.running()) return exit_status_;
  if (!broken_) process_.write_line(encode_shutdown("shutdown"));
  process_.close_input();
  exit_status_ = process_.wait_for(timeouts_.shutdown_grace);
  if (!exit_status_) exit_status_ = process_.kill();
  return exit_status_;
}

}  // namespace nirs::bridge
