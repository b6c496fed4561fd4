#include "toc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "toc/error.hpp"
#include "toc/sampling.hpp"
#include "toc/serialize.hpp"

namespace toc {

using nlohmann::json;

const TaskSpec* SuiteFile::find(const std::string& task_id) const {
  for (const auto& task : tasks) {
    if (task.id == task_id) return &task;
  }
  return nullptr;
}

namespace {

[[noreturn]] void suite_fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::suite_error, where + ": " + what);
}

std::string strip_kind(const Error& e) {
  const std::string text = e.what();
  const auto prefix = std::string(to_string(e.kind())) + ": ";
  return text.rfind(prefix, 0) == 0 ? text.substr(prefix.size()) : text;
}

}  // namespace

SuiteFile parse_suite(const json& doc) {
  if (!doc.is_object()) suite_fail("$", "suite must be an object");
  SuiteFile suite;
  if (!doc.contains("suite_id") || !doc["suite_id"].is_string()) suite_fail("suite_id", "missing or not a string");
  suite.suite_id = doc["suite_id"].get<std::string>();

  if (doc.contains("tool_bindings")) {
    const auto& bindings = doc["tool_bindings"];
    if (!bindings.is_object()) suite_fail("tool_bindings", "must be an object");
    for (const auto& [name, key] : bindings.items()) {
      if (!key.is_string()) suite_fail("tool_bindings." + name, "must be a string");
      suite.tool_bindings[name] = key.get<std::string>();
    }
  }
  if (doc.contains("data")) suite.data = doc["data"];

  if (!doc.contains("tasks") || !doc["tasks"].is_array()) suite_fail("tasks", "missing or not a list");
  std::set<std::string> ids;
  const auto& tasks = doc["tasks"];
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string where = "tasks[" + std::to_string(i) + "]";
    TaskSpec task;
    try {
      task = tasks[i].get<TaskSpec>();
    } catch (const json::exception& e) {
      suite_fail(where, e.what());
    } catch (const Error& e) {
      suite_fail(where, strip_kind(e));
    }
    try {
      task.validate();
    } catch (const Error& e) {
      suite_fail(where, strip_kind(e));
    }
    if (!ids.insert(task.id).second) suite_fail(where + ".id", "duplicate task id '" + task.id + "'");
    for (std::size_t t = 0; t < task.tools.size(); ++t) {
      if (!suite.tool_bindings.count(task.tools[t].name)) {
        suite_fail(where + ".tools[" + std::to_string(t) + "]",
                   "tool '" + task.tools[t].name + "' has no entry in tool_bindings");
      }
    }
    suite.tasks.push_back(std::move(task));
  }
  return suite;
}

SuiteFile load_suite(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::suite_error, "cannot open suite " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::suite_error, path.string() + ": " + e.what());
  }
  try {
    return parse_suite(doc);
  } catch (const Error& e) {
    throw Error(ErrorKind::suite_error, path.string() + ": " + strip_kind(e));
  }
}

json suite_to_json(const SuiteFile& suite) {
  json bindings = json::object();
  for (const auto& [name, key] : suite.tool_bindings) bindings[name] = key;
  return {{"suite_id", suite.suite_id}, {"tool_bindings", bindings}, {"data", suite.data}, {"tasks", suite.tasks}};
}

void save_suite(const SuiteFile& suite, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io_error, "cannot write " + path.string());
  out << suite_to_json(suite).dump(2) << "\n";
  if (!out) throw Error(ErrorKind::io_error, "write failed for " + path.string());
}

std::string Strategy::label() const {
  switch (kind) {
    case StrategyKind::toc:
      return "ToC(" + std::to_string(tree.depth) + "-" + std::to_string(tree.width) + ")";
    case StrategyKind::react:
      return "ReAct";
    case StrategyKind::codeact:
      return termination == CodeActTermination::gt_match ? "CodeAct(gt-match)" : "CodeAct";
  }
  return "?";
}

std::vector<Aggregate> BenchReport::aggregates() const {
  std::vector<Aggregate> out;
  std::vector<std::size_t> correct;
  std::vector<std::int64_t> turns;
  std::vector<std::int64_t> words;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Aggregate& a) { return a.strategy == row.strategy; });
    std::size_t k = static_cast<std::size_t>(it - out.begin());
    if (it == out.end()) {
      out.push_back({row.strategy, 0, 0, 0, 0});
      correct.push_back(0);
      turns.push_back(0);
      words.push_back(0);
    }
    ++out[k].tasks;
    correct[k] += row.correct ? 1 : 0;
    turns[k] += row.turns;
    words[k] += row.output_words;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto n = static_cast<double>(out[k].tasks);
    out[k].accuracy = static_cast<double>(correct[k]) / n;
    out[k].avg_turns = static_cast<double>(turns[k]) / n;
    out[k].avg_output_words = static_cast<double>(words[k]) / n;
  }
  return out;
}

void BenchReport::append(const BenchReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  protocol_errors += other.protocol_errors;
}

std::uint64_t task_seed(std::uint64_t run_seed, const std::string& task_id) {
  return sampling::derive_seed(run_seed, task_id);
}

TaskRun run_task(const TaskSpec& task, const Strategy& strategy, const RunEnvironment& env, std::uint64_t seed) {
  if (!env.backend || !env.executor) throw Error(ErrorKind::config_error, "run environment is incomplete");
  TaskRun result;
  result.row.task_id = task.id;
  result.row.strategy = strategy.label();

  Gateway gateway(env.backend());
  const auto slots = strategy.kind == StrategyKind::toc ? static_cast<std::size_t>(std::max(1, strategy.tree.width)) : 1;
  ExecutorPool executor(env.executor, slots);

  auto latency = [&] {
    std::int64_t total = 0;
    for (const auto& entry : gateway.audit()) total += entry.duration_ms;
    return total;
  };

  try {
    if (strategy.kind == StrategyKind::toc) {
      auto tree = grow_tree(task, strategy.tree, env.pools, executor, gateway, seed);
      std::int64_t execution = 0;
      for (const auto& node : tree.nodes) execution += node.outcome.duration_ms;
      result.row.correct = tree.metrics.correct;
      result.row.turns = tree.metrics.turns;
      result.row.output_words = tree.metrics.output_words;
      result.row.duration_ms = latency() + execution;
      result.tree = std::move(tree);
    } else {
      if (env.pools.models.empty()) throw Error(ErrorKind::config_error, "model pool is empty");
      const auto& model = sample_model(env.pools.models, seed, 1, 1);
      // Baselines drive a single persistent executor slot.
      struct Slot final : CodeExecutor {
        ExecutorPool& pool;
        explicit Slot(ExecutorPool& p) : pool(p) {}
        ExecutionOutcome run(const ExecCall& call) override { return pool.run(call); }
      } slot(executor);
      auto run = strategy.kind == StrategyKind::react
                     ? react_loop(task, model, gateway, slot, strategy.max_steps, strategy.tree.temperature)
                     : codeact_loop(task, model, gateway, slot, strategy.max_steps, strategy.termination,
                                    strategy.tree.temperature);
      result.row.correct = run.correct;
      result.row.turns = run.turns;
      result.row.output_words = run.output_words;
      result.row.duration_ms = latency() + run.execution_ms;
      if (!run.error.empty()) result.row.note = run.error;
      result.baseline = std::move(run);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config_error) throw;
    result.row.correct = false;
    result.row.output_words = gateway.output_words();
    result.row.duration_ms = latency();
    result.row.note = e.what();
    if (e.kind() == ErrorKind::protocol_error) throw;
  }
  return result;
}

BenchReport run_benchmark(const SuiteFile& suite, const Strategy& strategy, const RunEnvironment& env,
                          std::uint64_t seed, int jobs) {
  if (jobs < 1) throw Error(ErrorKind::config_error, "jobs must be >= 1");
  if (strategy.kind == StrategyKind::toc) strategy.tree.validate();

  BenchReport report;
  report.rows.resize(suite.tasks.size());
  std::vector<std::exception_ptr> fatal(suite.tasks.size());
  std::vector<char> protocol(suite.tasks.size(), 0);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < suite.tasks.size(); i = next++) {
      const auto& task = suite.tasks[i];
      try {
        report.rows[i] = run_task(task, strategy, env, task_seed(seed, task.id)).row;
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::protocol_error) {
          protocol[i] = 1;
          report.rows[i] = {task.id, strategy.label(), false, 0, 0, 0, e.what()};
        } else {
          fatal[i] = std::current_exception();
        }
      } catch (...) {
        fatal[i] = std::current_exception();
      }
    }
  };

  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), suite.tasks.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& error : fatal) {
    if (error) std::rethrow_exception(error);
  }
  for (char p : protocol) report.protocol_errors += p;
  return report;
}

namespace {

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string render_columns(const std::vector<std::vector<std::string>>& table) {
  std::vector<std::size_t> widths;
  for (const auto& row : table) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out;
  for (const auto& row : table) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      line += c == 0 ? pad_right(row[c], widths[c]) : pad_left(row[c], widths[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace

std::string format_table(const BenchReport& report) {
  std::vector<std::vector<std::string>> table{{"Strategy", "Avg Turns", "Correct", "Output Words"}};
  for (const auto& agg : report.aggregates()) {
    table.push_back({agg.strategy, fixed(agg.avg_turns, 2), fixed(agg.accuracy * 100.0, 1) + "%",
                     fixed(agg.avg_output_words, 1)});
  }
  return render_columns(table);
}

json report_to_json(const BenchReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"task_id", row.task_id},
                    {"strategy", row.strategy},
                    {"correct", row.correct},
                    {"turns", row.turns},
                    {"output_words", row.output_words},
                    {"duration_ms", row.duration_ms},
                    {"note", row.note}});
  }
  json aggregates = json::array();
  for (const auto& agg : report.aggregates()) {
    aggregates.push_back({{"strategy", agg.strategy},
                          {"tasks", agg.tasks},
                          {"accuracy", agg.accuracy},
                          {"avg_turns", agg.avg_turns},
                          {"avg_output_words", agg.avg_output_words}});
  }
  return {{"rows", std::move(rows)}, {"aggregates", std::move(aggregates)}, {"protocol_errors", report.protocol_errors}};
}

BenchReport report_from_json(const json& doc) {
  BenchReport report;
  try {
    for (const auto& item : doc.at("rows")) {
      ReportRow row;
      row.task_id = item.at("task_id").get<std::string>();
      row.strategy = item.at("strategy").get<std::string>();
      row.correct = item.at("correct").get<bool>();
      row.turns = item.at("turns").get<int>();
      row.output_words = item.at("output_words").get<std::int64_t>();
      row.duration_ms = item.at("duration_ms").get<std::int64_t>();
      row.note = item.value("note", std::string{});
      report.rows.push_back(std::move(row));
    }
    report.protocol_errors = doc.value("protocol_errors", 0);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config_error, std::string("malformed report: ") + e.what());
  }
  return report;
}

void emit_report(const BenchReport& report, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io_error, "cannot write report to " + path.string());
  if (format == ReportFormat::table_text) {
    out << format_table(report);
  } else {
    out << report_to_json(report).dump(2) << "\n";
  }
  out.flush();
  if (!out) throw Error(ErrorKind::io_error, "write failed for " + path.string());
}

std::vector<AblationCell> run_ablation(const SuiteFile& suite, const TreeConfig& base, const RunEnvironment& env,
                                       std::uint64_t seed, int max_depth, int max_width, int jobs) {
  if (max_depth < 1 || max_width < 1) throw Error(ErrorKind::config_error, "ablation grid must be at least 1x1");
  std::vector<AblationCell> cells;
  for (int l = 1; l <= max_depth; ++l) {
    for (int m = 1; m <= max_width; ++m) {
      Strategy strategy;
      strategy.tree = base;
      strategy.tree.depth = l;
      strategy.tree.width = m;
      const auto report = run_benchmark(suite, strategy, env, seed, jobs);
      auto aggregates = report.aggregates();
      AblationCell cell{l, m, aggregates.empty() ? Aggregate{strategy.label(), 0, 0, 0, 0} : aggregates.front()};
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string format_ablation(const std::vector<AblationCell>& cells) {
  int max_width = 0;
  int max_depth = 0;
  for (const auto& cell : cells) {
    max_width = std::max(max_width, cell.width);
    max_depth = std::max(max_depth, cell.depth);
  }
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"Layer \\ Node Per Layer"};
  for (int m = 1; m <= max_width; ++m) header.push_back(std::to_string(m));
  table.push_back(header);
  for (int l = 1; l <= max_depth; ++l) {
    std::vector<std::string> row{std::to_string(l)};
    for (int m = 1; m <= max_width; ++m) {
      auto it = std::find_if(cells.begin(), cells.end(),
                             [&](const AblationCell& c) { return c.depth == l && c.width == m; });
      row.push_back(it == cells.end() ? "-"
                                      : fixed(it->aggregate.accuracy * 100.0, 1) + "% (" +
                                            fixed(it->aggregate.avg_turns, 2) + ")");
    }
    table.push_back(row);
  }
  return render_columns(table);
}

ScriptedBundle ScriptedBundle::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config_error, "cannot open scripted bundle " + path.string());
  try {
    const auto doc = json::parse(in);
    ScriptedBundle bundle;
    bundle.transcript = Transcript::from_json(doc.at("transcript"));
    bundle.script_table = ScriptTable::from_json(doc.value("script_table", json::array()));
    return bundle;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config_error, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::config_error, path.string() + ": " + strip_kind(e));
  }
}

json ScriptedBundle::to_json() const {
  return {{"transcript", transcript.to_json()}, {"script_table", script_table.to_json()}};
}

void ScriptedBundle::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io_error, "cannot write " + path.string());
  out << to_json().dump(2) << "\n";
  if (!out) throw Error(ErrorKind::io_error, "write failed for " + path.string());
}

RunEnvironment scripted_environment(const ScriptedBundle& bundle, Pools pools) {
  auto transcript = std::make_shared<const Transcript>(bundle.transcript);
  auto table = std::make_shared<const ScriptTable>(bundle.script_table);
  RunEnvironment env;
  env.backend = [transcript] { return std::make_shared<ScriptedBackend>(transcript); };
  env.executor = [table] { return std::make_unique<ScriptedExecutor>(table); };
  env.pools = std::move(pools);
  return env;
}

}  // namespace toc
