#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "toc/core.hpp"
#include "toc/gateway.hpp"

namespace toc {

struct ExecutorLimits {
  std::int64_t timeout_ms = 10'000;
  std::int64_t max_output_bytes = 64 * 1024;
  int max_tool_calls = 64;

  void validate() const;
};

// The tree's only supervision signal: success iff the program ran and
// produced a non-empty answer.
NodeStatus classify_outcome(const ExecutionOutcome& outcome);

enum class CodeMatch { substring, exact };

struct ScriptEntry {
  CodeMatch match = CodeMatch::substring;
  std::string pattern;
  ExecutionOutcome outcome;
};

struct ScriptTable {
  std::vector<ScriptEntry> entries;

  static ScriptTable from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

inline constexpr std::string_view kScriptMiss = "script_miss";

// First matching entry's outcome verbatim; no match yields
// {exception, stderr="script_miss"}.
ExecutionOutcome execute_scripted(std::string_view code, const ScriptTable& table, const ExecutorLimits& limits);

// One program to run. `gateway` and `model_id` serve helper-tool callbacks.
struct ExecCall {
  std::string code;
  std::vector<ToolDescription> tools;
  bool keep_namespace = false;
  Gateway* gateway = nullptr;
  std::string model_id;
  double temperature = 0.1;
};

class CodeExecutor {
 public:
  virtual ~CodeExecutor() = default;
  virtual ExecutionOutcome run(const ExecCall& call) = 0;
};

class ScriptedExecutor final : public CodeExecutor {
 public:
  ScriptedExecutor(std::shared_ptr<const ScriptTable> table, ExecutorLimits limits = {});
  ExecutionOutcome run(const ExecCall& call) override;

 private:
  std::shared_ptr<const ScriptTable> table_;
  ExecutorLimits limits_;
};

// Fixed set of single-owner executor slots; run_all fans a batch out across
// them and returns outcomes in input order.
class ExecutorPool {
 public:
  using Factory = std::function<std::unique_ptr<CodeExecutor>()>;

  ExecutorPool(Factory factory, std::size_t slots);

  std::size_t slots() const { return slots_.size(); }
  ExecutionOutcome run(const ExecCall& call);
  std::vector<ExecutionOutcome> run_all(std::span<const ExecCall> calls);

 private:
  std::size_t acquire();
  void release(std::size_t slot);

  Factory factory_;
  std::vector<std::unique_ptr<CodeExecutor>> slots_;
  std::vector<bool> busy_;
  std::mutex mutex_;
  std::condition_variable available_;
};

}  // namespace toc
