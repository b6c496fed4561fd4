#pragma once

// Client side of the sandbox worker protocol.
//
// Frames are a 4-byte big-endian byte count followed by that many bytes of
// UTF-8 JSON. Every frame is an object with a "kind" field:
//
//   hello              {kind, version}                      both directions
//   exec_request       {kind, id, code, tool_names, timeout_ms,
//                       max_output_bytes, keep_namespace}    orchestrator -> worker
//   exec_result        {kind, id, status, value, stdout, stderr, duration_ms}
//   llm_call_request   {kind, id, prompt}                   worker -> orchestrator
//   llm_call_response  {kind, id, completion | error}       orchestrator -> worker
//   shutdown           {kind}                               orchestrator -> worker
//
// The orchestrator owns the timeout: when a program overruns, the worker is
// killed and respawned rather than asked to stop.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "toc/execution.hpp"

namespace toc {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 64u << 20;

std::string encode_frame(const nlohmann::json& message);

// Incremental decoder; throws protocol_error on oversized frames, invalid
// JSON or frames without a string "kind".
class FrameDecoder {
 public:
  void feed(std::string_view bytes);
  std::optional<nlohmann::json> next();
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::string buffer_;
};

class SandboxWorker {
 public:
  // `command` is run through /bin/sh -c.
  explicit SandboxWorker(std::string command, std::chrono::milliseconds handshake_timeout = std::chrono::seconds(10));
  ~SandboxWorker();

  SandboxWorker(const SandboxWorker&) = delete;
  SandboxWorker& operator=(const SandboxWorker&) = delete;

  void start();
  void restart();
  void kill();
  // Sends shutdown and waits briefly for a clean exit.
  void stop();
  bool running() const { return pid_ > 0; }
  int restarts() const { return restarts_; }

  // Returns false when the worker's stdin is gone.
  bool send(const nlohmann::json& message);

  enum class ReadStatus { frame, timeout, closed };
  // Waits until `deadline` for the next frame.
  ReadStatus receive(std::chrono::steady_clock::time_point deadline, nlohmann::json& out);

  std::uint64_t next_request_id() { return ++request_counter_; }

 private:
  std::string command_;
  std::chrono::milliseconds handshake_timeout_;
  int pid_ = -1;
  int to_worker_ = -1;
  int from_worker_ = -1;
  int restarts_ = 0;
  std::uint64_t request_counter_ = 0;
  FrameDecoder decoder_;
};

struct SandboxCall {
  std::string code;
  std::vector<std::string> tool_names;
  ExecutorLimits limits;
  bool keep_namespace = false;
  std::string model_id;
  double temperature = 0.1;
};

// Runs one program on `worker`, serving helper-tool completions through
// `gateway` (may be null, in which case callbacks are answered with an
// error). Throws protocol_error on a protocol violation.
ExecutionOutcome execute_sandboxed(const SandboxCall& call, SandboxWorker& worker, Gateway* gateway);

class SandboxExecutor final : public CodeExecutor {
 public:
  SandboxExecutor(std::string command, ExecutorLimits limits);

  ExecutionOutcome run(const ExecCall& call) override;

 private:
  SandboxWorker worker_;
  ExecutorLimits limits_;
};

}  // namespace toc
