#include "toc/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <mutex>
#include <thread>

#include "toc/error.hpp"
#include "toc/helpers.hpp"
#include "toc/text.hpp"

namespace toc {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string encode_frame(const json& message) {
  const std::string body = message.dump();
  if (body.size() > kMaxFrameBytes) throw Error(ErrorKind::protocol_error, "frame too large to send");
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string frame;
  frame.reserve(4 + body.size());
  frame.push_back(static_cast<char>((n >> 24) & 0xFF));
  frame.push_back(static_cast<char>((n >> 16) & 0xFF));
  frame.push_back(static_cast<char>((n >> 8) & 0xFF));
  frame.push_back(static_cast<char>(n & 0xFF));
  frame += body;
  return frame;
}

void FrameDecoder::feed(std::string_view bytes) { buffer_.append(bytes); }

std::optional<json> FrameDecoder::next() {
  if (buffer_.size() < 4) return std::nullopt;
  const auto byte = [this](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[i])); };
  const std::uint32_t n = (byte(0) << 24) | (byte(1) << 16) | (byte(2) << 8) | byte(3);
  if (n > kMaxFrameBytes) throw Error(ErrorKind::protocol_error, "frame length " + std::to_string(n) + " exceeds limit");
  if (buffer_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;

  const std::string body = buffer_.substr(4, n);
  buffer_.erase(0, 4 + static_cast<std::size_t>(n));
  json message;
  try {
    message = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::protocol_error, std::string("undecodable frame: ") + e.what());
  }
  if (!message.is_object() || !message.contains("kind") || !message.at("kind").is_string()) {
    throw Error(ErrorKind::protocol_error, "frame without a string 'kind'");
  }
  return message;
}

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

std::int64_t elapsed_ms(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - since).count();
}

}  // namespace

SandboxWorker::SandboxWorker(std::string command, std::chrono::milliseconds handshake_timeout)
    : command_(std::move(command)), handshake_timeout_(handshake_timeout) {}

SandboxWorker::~SandboxWorker() { stop(); }

void SandboxWorker::start() {
  if (running()) return;
  ignore_sigpipe();

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw Error(ErrorKind::config_error, "pipe() failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error(ErrorKind::config_error, "pipe() failed");
  }

  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorKind::config_error, "fork() failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }

  ::setpgid(pid, pid);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_worker_ = in_pipe[1];
  from_worker_ = out_pipe[0];
  decoder_ = FrameDecoder{};

  send({{"kind", "hello"}, {"version", kProtocolVersion}});
  json reply;
  const auto status = receive(Clock::now() + handshake_timeout_, reply);
  if (status != ReadStatus::frame) {
    kill();
    throw Error(ErrorKind::protocol_error, status == ReadStatus::timeout ? "worker handshake timed out"
                                                                         : "worker exited during handshake");
  }
  if (reply.at("kind") != "hello" || reply.value("version", -1) != kProtocolVersion) {
    kill();
    throw Error(ErrorKind::protocol_error, "unexpected handshake reply: " + reply.dump());
  }
}

void SandboxWorker::kill() {
  if (pid_ > 0) {
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
  pid_ = -1;
  close_fd(to_worker_);
  close_fd(from_worker_);
}

void SandboxWorker::restart() {
  kill();
  ++restarts_;
  start();
}

void SandboxWorker::stop() {
  if (!running()) return;
  send({{"kind", "shutdown"}});
  close_fd(to_worker_);
  for (int i = 0; i < 50; ++i) {
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == pid_) {
      ::kill(-pid_, SIGKILL);
      pid_ = -1;
      close_fd(from_worker_);
      return;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  kill();
}

bool SandboxWorker::send(const json& message) {
  if (to_worker_ < 0) return false;
  const std::string frame = encode_frame(message);
  std::size_t written = 0;
  while (written < frame.size()) {
    const auto n = ::write(to_worker_, frame.data() + written, frame.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    written += static_cast<std::size_t>(n);
  }
  return true;
}

SandboxWorker::ReadStatus SandboxWorker::receive(Clock::time_point deadline, json& out) {
  for (;;) {
    if (auto frame = decoder_.next()) {
      out = std::move(*frame);
      return ReadStatus::frame;
    }
    if (from_worker_ < 0) return ReadStatus::closed;
    const auto remaining = std::chrono::ceil<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (remaining <= 0) return ReadStatus::timeout;

    pollfd pfd{from_worker_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<std::int64_t>(remaining, 1000)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      return ReadStatus::closed;
    }
    if (ready == 0) continue;

    char chunk[65536];
    const auto n = ::read(from_worker_, chunk, sizeof(chunk));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return ReadStatus::closed;
    decoder_.feed(std::string_view(chunk, static_cast<std::size_t>(n)));
  }
}

ExecutionOutcome execute_sandboxed(const SandboxCall& call, SandboxWorker& worker, Gateway* gateway) {
  call.limits.validate();
  if (!worker.running()) worker.start();

  const auto started = Clock::now();
  const auto deadline = started + std::chrono::milliseconds(call.limits.timeout_ms);
  const auto id = worker.next_request_id();

  auto crashed = [&] {
    worker.restart();
    ExecutionOutcome outcome;
    outcome.status = OutcomeStatus::exception;
    outcome.stderr_text = "worker_crash";
    outcome.duration_ms = elapsed_ms(started);
    return outcome;
  };
  auto violation = [&](const std::string& what) -> Error {
    worker.kill();
    return Error(ErrorKind::protocol_error, what);
  };

  const json request = {{"kind", "exec_request"},
                        {"id", id},
                        {"code", call.code},
                        {"tool_names", call.tool_names},
                        {"timeout_ms", call.limits.timeout_ms},
                        {"max_output_bytes", call.limits.max_output_bytes},
                        {"keep_namespace", call.keep_namespace}};
  if (!worker.send(request)) return crashed();

  int tool_calls = 0;
  for (;;) {
    json message;
    SandboxWorker::ReadStatus status;
    try {
      status = worker.receive(deadline, message);
    } catch (const Error&) {
      worker.kill();
      throw;
    }

    if (status == SandboxWorker::ReadStatus::timeout) {
      ExecutionOutcome outcome;
      outcome.status = OutcomeStatus::timeout;
      outcome.stderr_text = "execution exceeded " + std::to_string(call.limits.timeout_ms) + " ms";
      outcome.duration_ms = elapsed_ms(started);
      worker.restart();
      return outcome;
    }
    if (status == SandboxWorker::ReadStatus::closed) return crashed();

    const auto kind = message.at("kind").get<std::string>();
    if (kind == "llm_call_request") {
      json reply = {{"kind", "llm_call_response"}, {"id", message.value("id", json(nullptr))}};
      if (!message.contains("prompt") || !message.at("prompt").is_string()) {
        throw violation("llm_call_request without a prompt");
      }
      if (++tool_calls > call.limits.max_tool_calls) {
        reply["error"] = "tool call limit of " + std::to_string(call.limits.max_tool_calls) + " reached";
      } else if (gateway == nullptr) {
        reply["error"] = "no completion backend attached to this executor";
      } else {
        try {
          reply["completion"] = res_handler(message.at("prompt").get<std::string>(), *gateway, call.model_id,
                                            call.temperature);
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::config_error) throw;
          reply["error"] = e.what();
        }
      }
      if (!worker.send(reply)) return crashed();
      continue;
    }
    if (kind != "exec_result") throw violation("unexpected '" + kind + "' frame while awaiting exec_result");

    const auto reply_id = message.value("id", json(nullptr));
    if (!reply_id.is_number_unsigned() || reply_id.get<std::uint64_t>() != id) {
      throw violation("exec_result id " + reply_id.dump() + " does not match request " + std::to_string(id));
    }

    ExecutionOutcome outcome;
    try {
      outcome.status = outcome_status_from_string(message.at("status").get<std::string>());
      outcome.stdout_text = message.value("stdout", std::string{});
      outcome.stderr_text = message.value("stderr", std::string{});
      outcome.value = std::string(text::trim(message.value("value", std::string{})));
    } catch (const std::exception& e) {
      throw violation(std::string("malformed exec_result: ") + e.what());
    }
    if (outcome.status == OutcomeStatus::timeout || outcome.status == OutcomeStatus::parse_failure) {
      throw violation("worker reported status '" + std::string(to_string(outcome.status)) + "'");
    }
    if (outcome.status == OutcomeStatus::ok && outcome.value.empty()) outcome.status = OutcomeStatus::empty;
    outcome.duration_ms = std::min(elapsed_ms(started), call.limits.timeout_ms);
    return outcome;
  }
}

SandboxExecutor::SandboxExecutor(std::string command, ExecutorLimits limits)
    : worker_(std::move(command)), limits_(limits) {}

ExecutionOutcome SandboxExecutor::run(const ExecCall& call) {
  SandboxCall sandbox_call;
  sandbox_call.code = call.code;
  for (const auto& tool : call.tools) sandbox_call.tool_names.push_back(tool.name);
  sandbox_call.limits = limits_;
  sandbox_call.keep_namespace = call.keep_namespace;
  sandbox_call.model_id = call.model_id;
  sandbox_call.temperature = call.temperature;
  return execute_sandboxed(sandbox_call, worker_, call.gateway);
}

}  // namespace toc
