#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "toc/baselines.hpp"
#include "toc/core.hpp"
#include "toc/execution.hpp"
#include "toc/gateway.hpp"
#include "toc/tree.hpp"

namespace toc {

// ---------------------------------------------------------------------------
// Suites

struct SuiteFile {
  std::string suite_id;
  std::vector<TaskSpec> tasks;
  // tool name -> implementation key in the worker registry (or a scripted stub)
  std::map<std::string, std::string> tool_bindings;
  // Free-form fixture data for the tool implementations (price catalogs,
  // user tables, site locations). Carried through untouched.
  nlohmann::json data = nlohmann::json::object();

  const TaskSpec* find(const std::string& task_id) const;
};

// Throws suite_error naming the offending field, e.g. "tasks[2].checker.terms".
SuiteFile parse_suite(const nlohmann::json& doc);
SuiteFile load_suite(const std::filesystem::path& path);
nlohmann::json suite_to_json(const SuiteFile& suite);
void save_suite(const SuiteFile& suite, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Strategies and runs

enum class StrategyKind { toc, react, codeact };

struct Strategy {
  StrategyKind kind = StrategyKind::toc;
  TreeConfig tree;
  int max_steps = kDefaultMaxSteps;
  CodeActTermination termination = CodeActTermination::answer_tag;

  std::string label() const;
};

// Everything a run needs besides the task. Backends and executors are
// created per task run so that runs never share consumption state.
struct RunEnvironment {
  std::function<std::shared_ptr<Backend>()> backend;
  ExecutorPool::Factory executor;
  Pools pools;
};

struct ReportRow {
  std::string task_id;
  std::string strategy;
  bool correct = false;
  int turns = 0;
  std::int64_t output_words = 0;
  std::int64_t duration_ms = 0;
  std::string note;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct Aggregate {
  std::string strategy;
  std::size_t tasks = 0;
  double accuracy = 0;
  double avg_turns = 0;
  double avg_output_words = 0;

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

struct BenchReport {
  std::vector<ReportRow> rows;
  int protocol_errors = 0;

  // One aggregate per strategy, in order of first appearance; always
  // recomputed from rows.
  std::vector<Aggregate> aggregates() const;
  void append(const BenchReport& other);

  friend bool operator==(const BenchReport& a, const BenchReport& b) { return a.rows == b.rows; }
};

struct TaskRun {
  ReportRow row;
  std::optional<TreeRecord> tree;
  std::optional<BaselineRun> baseline;
};

std::uint64_t task_seed(std::uint64_t run_seed, const std::string& task_id);

TaskRun run_task(const TaskSpec& task, const Strategy& strategy, const RunEnvironment& env, std::uint64_t seed);

// Runs every task (up to `jobs` concurrently) and returns rows in suite
// order. A failing task is recorded as incorrect with a note; config errors
// propagate.
BenchReport run_benchmark(const SuiteFile& suite, const Strategy& strategy, const RunEnvironment& env,
                          std::uint64_t seed, int jobs = 1);

enum class ReportFormat { table_text, structured };

std::string format_table(const BenchReport& report);
nlohmann::json report_to_json(const BenchReport& report);
BenchReport report_from_json(const nlohmann::json& doc);
void emit_report(const BenchReport& report, const std::filesystem::path& path, ReportFormat format);

// Accuracy grid over depth x width, laid out like a Layer / Node-per-layer
// table.
struct AblationCell {
  int depth = 1;
  int width = 1;
  Aggregate aggregate;
};
std::vector<AblationCell> run_ablation(const SuiteFile& suite, const TreeConfig& base, const RunEnvironment& env,
                                       std::uint64_t seed, int max_depth, int max_width, int jobs = 1);
std::string format_ablation(const std::vector<AblationCell>& cells);

// ---------------------------------------------------------------------------
// Scripted bundles: a transcript plus a script table in one document,
// {"transcript": [...], "script_table": [...]}.

struct ScriptedBundle {
  Transcript transcript;
  ScriptTable script_table;

  static ScriptedBundle load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;
};

RunEnvironment scripted_environment(const ScriptedBundle& bundle, Pools pools);

}  // namespace toc
