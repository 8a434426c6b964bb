#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

#include <json.hpp>

#include "nirs/dataset.hpp"
#include "nirs/error.hpp"
#include "nirs/matrix.hpp"

namespace nirs::bridge {

constexpr int kProtocolVersion = 1;

class BridgeError : public Error {
 public:
  enum class Kind { spawn, timeout, incompatible, protocol, adapter, closed };
  BridgeError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(BridgeError::Kind k);

/// Child process with line-oriented pipes on its standard input and output.
/// Standard error is inherited so adapter logs reach the console.
class Subprocess {
 public:
  Subprocess() = default;
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;
  Subprocess(Subprocess&& other) noexcept;
  Subprocess& operator=(Subprocess&& other) noexcept;
  ~Subprocess();

  /// argv[0] is resolved through PATH. Throws BridgeError(spawn) naming it.
  static Subprocess spawn(const std::vector<std::string>& argv);

  bool running() const { return pid_ > 0; }
  pid_t pid() const { return pid_; }

  /// Writes `line` plus a newline. False when the child closed its input.
  bool write_line(std::string_view line);
  /// Next line without its newline; nullopt on timeout or end of stream
  /// (see eof()).
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  bool eof() const { return eof_; }

  void close_input();
  /// Waits up to `timeout` for exit; the exit status when it happened.
  std::optional<int> wait_for(std::chrono::milliseconds timeout);
  /// SIGKILL and reap.
  int kill();

 private:
  pid_t pid_ = -1;
  int in_fd_ = -1;   // child's stdin
  int out_fd_ = -1;  // child's stdout
  std::string buffer_;
  bool eof_ = false;
  int status_ = -1;
};

// Wire messages. One JSON object per line.

struct FitPredictRequest {
  std::string run_id;
  Task task = Task::regression;
  nlohmann::json fixed_params = nlohmann::json::object();
  const Matrix* x = nullptr;
  std::vector<double> y;  // regression targets or label ids
  const Matrix* q = nullptr;
};

struct BridgeResult {
  bool ok = false;
  std::vector<double> predictions;
  std::string error;
  std::string diagnostics;
};

struct Capabilities {
  std::vector<Task> tasks;
  std::string diagnostics;
  bool supports(Task t) const;
};

std::string encode_handshake(const std::string& run_id, const std::string& model_id);
std::string encode_fit_predict(const FitPredictRequest& request);
std::string encode_shutdown(const std::string& run_id);

/// Validates version and status; throws BridgeError(incompatible/adapter/
/// protocol).
Capabilities decode_handshake(std::string_view line);
/// Throws BridgeError(protocol) on malformed lines, wrong lengths or
/// non-finite predictions. Adapter-side failures come back as ok == false.
BridgeResult decode_fit_predict(std::string_view line, std::size_t expected_rows);

/// Row-major flattening used by the wire format.
nlohmann::json matrix_to_json(const Matrix& m);

struct AdapterTimeouts {
  std::chrono::milliseconds handshake{60000};
  std::chrono::milliseconds call{900000};
  std::chrono::milliseconds shutdown_grace{5000};
};

/// A live adapter process after a successful handshake. Calls are strictly
/// sequential; one instance per worker.
class ExternalModel {
 public:
  ExternalModel(const ExternalModel&) = delete;
  ExternalModel& operator=(const ExternalModel&) = delete;
  ExternalModel(ExternalModel&&) = default;
  ExternalModel& operator=(ExternalModel&&) = default;
  ~ExternalModel();

  static ExternalModel spawn(const std::string& model_id, const std::vector<std::string>& command,
                             AdapterTimeouts timeouts = {});

  const std::string& model_id() const { return model_id_; }
  const Capabilities& capabilities() const { return caps_; }
  bool alive() const { return process_.running() && !broken_; }

  /// One round trip. Throws BridgeError on timeout (the adapter is killed),
  /// protocol violations or adapter error status.
  std::vector<double> fit_predict(const FitPredictRequest& request);

  /// Graceful request, forced kill after the grace period. Idempotent.
  /// Returns the exit status when known.
  std::optional<int> shutdown();

 private:
  ExternalModel() = default;
  std::string model_id_;
  Capabilities caps_;
  AdapterTimeouts timeouts_;
  Subprocess process_;
  bool broken_ = false;
  std::optional<int> exit_status_;
  int calls_ = 0;
};

}  // namespace nirs::bridge
