#pragma once

// Shared domain types for the Tree-of-Code engine: tasks, tree nodes,
// execution outcomes and run metrics. Everything here is a plain value type;
// instances are built once and then only read, so they can be shared freely
// across the threads that execute one layer.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toc {

struct ToolDescription {
  std::string name;
  std::string description;
  std::string fn_signature;
  std::optional<std::string> output_example;
};

enum class CheckMode { keywords_all, keywords_any, exact_normalized };

std::string_view to_string(CheckMode mode);
CheckMode check_mode_from_string(std::string_view text);

struct AnswerChecker {
  CheckMode mode = CheckMode::keywords_all;
  std::vector<std::string> terms;

  // Throws config_error when the invariants do not hold.
  void validate() const;
};

struct TaskSpec {
  std::string id;
  std::string query;
  std::vector<ToolDescription> tools;
  AnswerChecker checker;
  std::string category;

  void validate() const;
};

enum class OutcomeStatus { ok, exception, timeout, empty, parse_failure };

std::string_view to_string(OutcomeStatus status);
OutcomeStatus outcome_status_from_string(std::string_view text);

struct ExecutionOutcome {
  OutcomeStatus status = OutcomeStatus::empty;
  std::string value;
  std::string stdout_text;
  std::string stderr_text;
  std::int64_t duration_ms = 0;

  friend bool operator==(const ExecutionOutcome&, const ExecutionOutcome&) = default;
};

enum class NodeStatus { success, failure };

std::string_view to_string(NodeStatus status);
NodeStatus node_status_from_string(std::string_view text);

struct NodeRecord {
  std::string id;
  int layer = 1;
  int index = 1;
  std::optional<std::string> parent_id;
  std::string thought;
  std::string code;
  ExecutionOutcome outcome;
  NodeStatus status = NodeStatus::failure;
  std::string prompt_id;
  std::string model_id;
  std::string prompt;
  std::string raw_output;
};

std::string make_node_id(int layer, int index);

// Orders node ids by (layer, index) rather than lexically, so "1-10" sorts
// after "1-9".
bool node_id_less(const NodeRecord& a, const NodeRecord& b);

struct TreeConfig {
  int depth = 3;  // L
  int width = 3;  // M
  std::int64_t timeout_ms = 10'000;
  std::size_t history_char_cap = 2'000;
  // Optional whole-history budget in characters; 0 disables it.
  std::size_t history_budget = 0;
  double temperature = 0.1;
  std::optional<std::string> aggregator_model;

  void validate() const;
};

struct RunMetrics {
  bool correct = false;
  int turns = 0;
  std::int64_t output_words = 0;
};

struct TreeRecord {
  std::string task_id;
  TreeConfig config;
  std::vector<NodeRecord> nodes;
  int layers_used = 0;
  std::vector<std::string> collected;
  std::optional<std::string> final_answer;
  RunMetrics metrics;
  std::uint64_t seed = 0;

  std::vector<const NodeRecord*> layer(int l) const;
  const NodeRecord* find(std::string_view id) const;
};

// Number of maximal non-whitespace runs in `text`.
std::int64_t count_output_words(std::string_view text);

bool check_answer(std::string_view response, const AnswerChecker& checker);

}  // namespace toc
