#pragma once

#include <memory>
#include <string>
#include <vector>

#include "toc/core.hpp"
#include "toc/execution.hpp"
#include "toc/gateway.hpp"

namespace testing {

inline toc::TaskSpec make_task(std::string id = "t1", std::string query = "What is six times seven?") {
  toc::TaskSpec task;
  task.id = std::move(id);
  task.query = std::move(query);
  task.tools = {{"multiply", "Multiplies two integers.", "multiply(a: int, b: int) -> int", "42"}};
  task.checker = {toc::CheckMode::keywords_all, {"42"}};
  return task;
}

inline std::shared_ptr<toc::ScriptedBackend> scripted(std::vector<toc::TranscriptEntry> entries) {
  auto transcript = std::make_shared<toc::Transcript>();
  transcript->entries = std::move(entries);
  return std::make_shared<toc::ScriptedBackend>(transcript);
}

inline toc::ExecutionOutcome ok(std::string value) {
  toc::ExecutionOutcome outcome;
  outcome.status = toc::OutcomeStatus::ok;
  outcome.stdout_text = value + "\n";
  outcome.value = std::move(value);
  return outcome;
}

inline toc::ExecutionOutcome failed(toc::OutcomeStatus status, std::string stderr_text = "boom") {
  toc::ExecutionOutcome outcome;
  outcome.status = status;
  outcome.stderr_text = std::move(stderr_text);
  return outcome;
}

inline toc::NodeRecord node(int layer, int index, std::string value) {
  toc::NodeRecord n;
  n.id = toc::make_node_id(layer, index);
  n.layer = layer;
  n.index = index;
  n.outcome = ok(std::move(value));
  n.status = toc::NodeStatus::success;
  return n;
}

inline toc::ExecutorPool::Factory scripted_executor(const toc::ScriptTable& table) {
  auto shared = std::make_shared<const toc::ScriptTable>(table);
  return [shared] { return std::make_unique<toc::ScriptedExecutor>(shared); };
}

}  // namespace testing
