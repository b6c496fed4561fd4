#include "toc/execution.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "toc/error.hpp"
#include "toc/serialize.hpp"

namespace toc {

using nlohmann::json;

void ExecutorLimits::validate() const {
  if (timeout_ms <= 0 || max_output_bytes <= 0 || max_tool_calls <= 0) {
    throw Error(ErrorKind::config_error, "executor limits must all be positive");
  }
}

NodeStatus classify_outcome(const ExecutionOutcome& outcome) {
  return outcome.status == OutcomeStatus::ok && !outcome.value.empty() ? NodeStatus::success : NodeStatus::failure;
}

ScriptTable ScriptTable::from_json(const json& doc) {
  if (!doc.is_array()) throw Error(ErrorKind::config_error, "script table must be a list");
  ScriptTable table;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    try {
      const auto& item = doc[i];
      ScriptEntry entry;
      const auto match = item.value("match", std::string("substring"));
      if (match == "substring") {
        entry.match = CodeMatch::substring;
      } else if (match == "exact") {
        entry.match = CodeMatch::exact;
      } else {
        throw Error(ErrorKind::config_error, "unknown match kind '" + match + "'");
      }
      entry.pattern = item.at("pattern").get<std::string>();
      entry.outcome = item.at("outcome").get<ExecutionOutcome>();
      table.entries.push_back(std::move(entry));
    } catch (const std::exception& e) {
      throw Error(ErrorKind::config_error, "script_table[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return table;
}

json ScriptTable::to_json() const {
  json doc = json::array();
  for (const auto& entry : entries) {
    doc.push_back({{"match", entry.match == CodeMatch::exact ? "exact" : "substring"},
                   {"pattern", entry.pattern},
                   {"outcome", entry.outcome}});
  }
  return doc;
}

ExecutionOutcome execute_scripted(std::string_view code, const ScriptTable& table, const ExecutorLimits& /*limits*/) {
  for (const auto& entry : table.entries) {
    const bool hit = entry.match == CodeMatch::exact ? code == entry.pattern
                                                      : code.find(entry.pattern) != std::string_view::npos;
    if (hit) return entry.outcome;
  }
  ExecutionOutcome miss;
  miss.status = OutcomeStatus::exception;
  miss.stderr_text = std::string(kScriptMiss);
  return miss;
}

ScriptedExecutor::ScriptedExecutor(std::shared_ptr<const ScriptTable> table, ExecutorLimits limits)
    : table_(std::move(table)), limits_(limits) {}

ExecutionOutcome ScriptedExecutor::run(const ExecCall& call) { return execute_scripted(call.code, *table_, limits_); }

ExecutorPool::ExecutorPool(Factory factory, std::size_t slots)
    : factory_(std::move(factory)), slots_(std::max<std::size_t>(slots, 1)), busy_(slots_.size(), false) {}

std::size_t ExecutorPool::acquire() {
  std::unique_lock lock(mutex_);
  available_.wait(lock, [this] { return std::find(busy_.begin(), busy_.end(), false) != busy_.end(); });
  const auto slot = static_cast<std::size_t>(std::find(busy_.begin(), busy_.end(), false) - busy_.begin());
  busy_[slot] = true;
  if (!slots_[slot]) slots_[slot] = factory_();
  return slot;
}

void ExecutorPool::release(std::size_t slot) {
  {
    std::lock_guard lock(mutex_);
    busy_[slot] = false;
  }
  available_.notify_one();
}

ExecutionOutcome ExecutorPool::run(const ExecCall& call) {
  const auto slot = acquire();
  try {
    auto outcome = slots_[slot]->run(call);
    release(slot);
    return outcome;
  } catch (...) {
    release(slot);
    throw;
  }
}

std::vector<ExecutionOutcome> ExecutorPool::run_all(std::span<const ExecCall> calls) {
  std::vector<ExecutionOutcome> outcomes(calls.size());
  if (calls.size() <= 1 || slots_.size() == 1) {
    for (std::size_t i = 0; i < calls.size(); ++i) outcomes[i] = run(calls[i]);
    return outcomes;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (auto i = next++; i < calls.size(); i = next++) {
      try {
        outcomes[i] = run(calls[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  const auto n = std::min(calls.size(), slots_.size());
  threads.reserve(n);
  for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
  for (auto& thread : threads) thread.join();
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

}  // namespace toc
