#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toc {

enum class ErrorKind {
  config_error,
  backend_error,
  transcript_miss,
  template_error,
  evolution_failed,
  protocol_error,
  suite_error,
  io_error,
  tool_exception,
  no_successes,
};

std::string_view to_string(ErrorKind kind);

// Every recoverable failure in the engine is raised as a toc::Error carrying
// its kind, so callers can map kinds onto exit codes or fallbacks.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config_error: return "config_error";
    case ErrorKind::backend_error: return "backend_error";
    case ErrorKind::transcript_miss: return "transcript_miss";
    case ErrorKind::template_error: return "template_error";
    case ErrorKind::evolution_failed: return "evolution_failed";
    case ErrorKind::protocol_error: return "protocol_error";
    case ErrorKind::suite_error: return "suite_error";
    case ErrorKind::io_error: return "io_error";
    case ErrorKind::tool_exception: return "tool_exception";
    case ErrorKind::no_successes: return "no_successes";
  }
  return "unknown_error";
}

}  // namespace toc
