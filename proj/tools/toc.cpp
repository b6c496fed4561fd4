// toc: run Tree-of-Code and baseline strategies over task suites.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "toc/bench.hpp"
#include "toc/error.hpp"
#include "toc/helpers.hpp"
#include "toc/prompt.hpp"
#include "toc/sandbox.hpp"
#include "toc/serialize.hpp"
#include "toc/suites.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;

struct CommonOptions {
  std::string suite;
  std::string strategy = "toc";
  int depth = 3;
  int width = 3;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string backend;
  std::string worker;
  std::string prompts;
  int max_steps = toc::kDefaultMaxSteps;
  bool gt_match = false;
  std::int64_t timeout_ms = 10'000;
};

void add_common(CLI::App* app, CommonOptions& opt) {
  app->add_option("--suite", opt.suite, "Suite file (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("--seed", opt.seed, "Run seed");
  app->add_option("--backend", opt.backend, "scripted:BUNDLE.json or remote:CONFIG.json")->required();
  app->add_option("--worker", opt.worker, "Sandbox worker command; overrides the bundle's script table");
  app->add_option("--prompts", opt.prompts, "Prompt pool directory")->check(CLI::ExistingDirectory);
  app->add_option("--timeout-ms", opt.timeout_ms, "Per-program execution timeout");
}

void add_strategy(CLI::App* app, CommonOptions& opt) {
  app->add_option("--strategy", opt.strategy, "toc, react or codeact")
      ->check(CLI::IsMember({"toc", "react", "codeact"}));
  app->add_option("--depth", opt.depth, "Max layers L")->check(CLI::Range(1, 64));
  app->add_option("--width", opt.width, "Nodes per layer M")->check(CLI::Range(1, 64));
  app->add_option("--max-steps", opt.max_steps, "Step limit for react/codeact")->check(CLI::Range(1, 1000));
  app->add_flag("--gt-match", opt.gt_match, "CodeAct stops once an output matches the expected answer");
}

struct Backend {
  toc::RunEnvironment env;
  std::optional<std::string> aggregator_model;
};

toc::PromptPool prompt_pool(const CommonOptions& opt) {
  return opt.prompts.empty() ? toc::default_prompt_pool() : toc::load_prompt_pool(opt.prompts);
}

Backend make_backend(const CommonOptions& opt) {
  Backend out;
  const auto colon = opt.backend.find(':');
  if (colon == std::string::npos) throw toc::Error(toc::ErrorKind::config_error, "--backend needs a kind prefix");
  const auto kind = opt.backend.substr(0, colon);
  const fs::path path = opt.backend.substr(colon + 1);

  toc::ExecutorLimits limits;
  limits.timeout_ms = opt.timeout_ms;
  limits.validate();

  if (kind == "scripted") {
    auto bundle = toc::ScriptedBundle::load(path);
    out.env = toc::scripted_environment(bundle, {prompt_pool(opt), {toc::ModelSpec{"scripted", "", "", 0.1, 2048}}});
  } else if (kind == "remote") {
    std::ifstream in(path);
    if (!in) throw toc::Error(toc::ErrorKind::config_error, "cannot open backend config " + path.string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw toc::Error(toc::ErrorKind::config_error, path.string() + ": " + e.what());
    }
    std::vector<toc::ModelSpec> models;
    toc::RetryPolicy retry;
    try {
      models = doc.at("models").get<std::vector<toc::ModelSpec>>();
      if (doc.contains("retry")) {
        const auto& r = doc["retry"];
        retry.attempts = r.value("attempts", retry.attempts);
        retry.initial_backoff = std::chrono::milliseconds(r.value("initial_backoff_ms", 500));
        retry.multiplier = r.value("multiplier", retry.multiplier);
        retry.request_timeout = std::chrono::seconds(r.value("request_timeout_s", 120));
      }
      if (doc.contains("aggregator_model")) out.aggregator_model = doc["aggregator_model"].get<std::string>();
    } catch (const json::exception& e) {
      throw toc::Error(toc::ErrorKind::config_error, path.string() + ": " + e.what());
    }
    if (models.empty()) throw toc::Error(toc::ErrorKind::config_error, path.string() + ": no models configured");
    if (opt.worker.empty()) throw toc::Error(toc::ErrorKind::config_error, "remote backends need --worker");
    out.env.backend = [models, retry] { return std::make_shared<toc::RemoteBackend>(models, retry); };
    out.env.pools = {prompt_pool(opt), models};
  } else {
    throw toc::Error(toc::ErrorKind::config_error, "unknown backend kind '" + kind + "'");
  }

  if (!opt.worker.empty()) {
    const auto command = opt.worker;
    out.env.executor = [command, limits] { return std::make_unique<toc::SandboxExecutor>(command, limits); };
  }
  return out;
}

toc::Strategy make_strategy(const CommonOptions& opt, const Backend& backend) {
  toc::Strategy strategy;
  strategy.kind = opt.strategy == "react"     ? toc::StrategyKind::react
                  : opt.strategy == "codeact" ? toc::StrategyKind::codeact
                                              : toc::StrategyKind::toc;
  strategy.tree.depth = opt.depth;
  strategy.tree.width = opt.width;
  strategy.tree.timeout_ms = opt.timeout_ms;
  strategy.tree.aggregator_model = backend.aggregator_model;
  strategy.max_steps = opt.max_steps;
  strategy.termination = opt.gt_match ? toc::CodeActTermination::gt_match : toc::CodeActTermination::answer_tag;
  strategy.tree.validate();
  return strategy;
}

toc::ReportFormat parse_format(const std::string& text) {
  return text == "structured" ? toc::ReportFormat::structured : toc::ReportFormat::table_text;
}

int cmd_run(const CommonOptions& opt, const std::string& task_id, bool full) {
  const auto suite = toc::load_suite(opt.suite);
  const auto* task = suite.find(task_id);
  if (task == nullptr) throw toc::Error(toc::ErrorKind::config_error, "no task '" + task_id + "' in " + opt.suite);
  const auto backend = make_backend(opt);
  const auto strategy = make_strategy(opt, backend);
  const auto result = toc::run_task(*task, strategy, backend.env, toc::task_seed(opt.seed, task->id));

  if (full) {
    json doc = {{"row", toc::report_to_json({{result.row}, 0})["rows"][0]}};
    if (result.tree) doc["tree"] = *result.tree;
    if (result.baseline) doc["baseline"] = *result.baseline;
    std::cout << doc.dump(2) << "\n";
    return 0;
  }

  if (result.tree) {
    const auto& tree = *result.tree;
    for (const auto& node : tree.nodes) {
      std::cout << "[" << node.id << "]";
      if (node.parent_id) std::cout << " <- " << *node.parent_id;
      std::cout << "  " << toc::to_string(node.status) << "  " << toc::to_string(node.outcome.status) << "  prompt="
                << node.prompt_id << " model=" << node.model_id << "\n";
      if (!node.outcome.value.empty()) std::cout << "    value: " << node.outcome.value << "\n";
    }
    std::cout << "layers used: " << tree.layers_used << "\n";
    std::cout << "collected: " << tree.collected.size() << "\n";
  } else if (result.baseline) {
    int k = 0;
    for (const auto& step : result.baseline->steps) {
      std::cout << "--- step " << ++k << " ---\n" << step.action << "\n";
      if (!step.observation.empty()) std::cout << "=> " << step.observation << "\n";
    }
    std::cout << "terminated by: " << toc::to_string(result.baseline->terminated_by) << "\n";
  }
  if (!result.row.note.empty()) std::cout << "note: " << result.row.note << "\n";
  const auto answer = result.tree ? result.tree->final_answer : result.baseline->final_answer;
  std::cout << "final answer: " << answer.value_or("(none)") << "\n";
  std::cout << "correct: " << (result.row.correct ? "yes" : "no") << "  turns: " << result.row.turns
            << "  output words: " << result.row.output_words << "\n";
  return 0;
}

int cmd_bench(const CommonOptions& opt, const std::string& report_path, const std::string& format) {
  const auto suite = toc::load_suite(opt.suite);
  const auto backend = make_backend(opt);
  const auto strategy = make_strategy(opt, backend);
  const auto report = toc::run_benchmark(suite, strategy, backend.env, opt.seed, opt.jobs);
  if (!report_path.empty()) toc::emit_report(report, report_path, parse_format(format));
  if (format == "structured" && report_path.empty()) {
    std::cout << toc::report_to_json(report).dump(2) << "\n";
  } else {
    std::cout << toc::format_table(report);
  }
  if (report.protocol_errors > 0) {
    std::cerr << report.protocol_errors << " task(s) hit a worker protocol error\n";
    return kExitProtocol;
  }
  return 0;
}

int cmd_ablate(const CommonOptions& opt, int max_depth, int max_width) {
  const auto suite = toc::load_suite(opt.suite);
  const auto backend = make_backend(opt);
  auto strategy = make_strategy(opt, backend);
  const auto cells = toc::run_ablation(suite, strategy.tree, backend.env, opt.seed, max_depth, max_width, opt.jobs);
  std::cout << toc::format_ablation(cells);
  return 0;
}

int cmd_evolve(const CommonOptions& opt, int count, const std::string& out_dir) {
  const auto backend = make_backend(opt);
  toc::Gateway gateway(backend.env.backend());
  auto pool = backend.env.pools.prompts;
  const auto result = toc::evolve_prompts(pool.templates.front(), count, gateway, backend.env.pools.models);
  for (const auto& discard : result.discards) {
    std::cerr << "discarded candidate " << discard.ordinal << ": " << discard.reason << "\n";
  }
  for (const auto& tmpl : result.templates) pool.templates.push_back(tmpl);
  toc::save_prompt_pool(pool, out_dir);
  std::cout << "kept " << result.templates.size() << " of " << count << " candidates; pool of "
            << pool.templates.size() << " written to " << out_dir << "\n";
  return 0;
}

int cmd_generate(const std::string& out_dir, int count, std::uint64_t seed) {
  const fs::path root = out_dir;
  fs::create_directories(root / "suites");
  auto write = [&](const toc::suites::GeneratedSuite& generated, const std::string& name) {
    toc::save_suite(generated.suite, root / "suites" / (name + ".json"));
    toc::suites::oracle_bundle(generated).save(root / "suites" / (name + ".oracle.json"));
  };
  write(toc::suites::message_decoder(count, seed), "message_decoder");
  write(toc::suites::trade_calculator(count, seed), "trade_calculator");
  write(toc::suites::api_chain(count, seed), "api_chain");
  const auto web = toc::suites::toy_web(count, seed);
  write(web.generated, "toy_web");
  toc::save_toy_site(web.site, root / "sites" / "toy-web");

  const auto fixture = toc::suites::comparison_fixture();
  toc::save_suite(fixture.suite, root / "suites" / "comparison.json");
  fixture.toc.save(root / "suites" / "comparison.toc.json");
  fixture.codeact.save(root / "suites" / "comparison.codeact.json");

  toc::save_prompt_pool(toc::default_prompt_pool(), root / "prompts");
  std::cout << "wrote suites, site and prompt pool under " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-of-Code agent runner"};
  app.require_subcommand(1);

  CommonOptions run_opt;
  std::string task_id;
  bool full = false;
  auto* run = app.add_subcommand("run", "Run one task and print its trace");
  add_common(run, run_opt);
  add_strategy(run, run_opt);
  run->add_option("--task", task_id, "Task id")->required();
  run->add_flag("--json", full, "Print the full record as JSON");

  CommonOptions bench_opt;
  std::string report_path;
  std::string format = "table";
  auto* bench = app.add_subcommand("bench", "Run a strategy over a whole suite");
  add_common(bench, bench_opt);
  add_strategy(bench, bench_opt);
  bench->add_option("--jobs", bench_opt.jobs, "Concurrent tasks")->check(CLI::Range(1, 256));
  bench->add_option("--report", report_path, "Write the report here");
  bench->add_option("--format", format, "table or structured")->check(CLI::IsMember({"table", "structured"}));

  CommonOptions ablate_opt;
  int max_depth = 3;
  int max_width = 3;
  auto* ablate = app.add_subcommand("ablate", "Accuracy over a depth x width grid");
  add_common(ablate, ablate_opt);
  ablate->add_option("--jobs", ablate_opt.jobs, "Concurrent tasks")->check(CLI::Range(1, 256));
  ablate->add_option("--max-depth", max_depth, "Largest L")->check(CLI::Range(1, 16));
  ablate->add_option("--max-width", max_width, "Largest M")->check(CLI::Range(1, 16));

  CommonOptions evolve_opt;
  int count = 5;
  std::string out_dir;
  auto* evolve = app.add_subcommand("evolve-prompts", "Grow the prompt pool by model rewrites of the first template");
  evolve->add_option("--backend", evolve_opt.backend, "scripted:BUNDLE.json or remote:CONFIG.json")->required();
  evolve->add_option("--prompts", evolve_opt.prompts, "Starting pool directory")->check(CLI::ExistingDirectory);
  evolve->add_option("--count", count, "Candidates to request")->check(CLI::Range(1, 100));
  evolve->add_option("--out", out_dir, "Output pool directory")->required();

  std::string gen_dir;
  int gen_count = 20;
  std::uint64_t gen_seed = 7;
  auto* generate = app.add_subcommand("generate", "Write the built-in suites, toy site and prompt pool");
  generate->add_option("--out", gen_dir, "Output directory")->required();
  generate->add_option("--count", gen_count, "Tasks per suite")->check(CLI::Range(1, 500));
  generate->add_option("--seed", gen_seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opt, task_id, full);
    if (*bench) return cmd_bench(bench_opt, report_path, format);
    if (*ablate) return cmd_ablate(ablate_opt, max_depth, max_width);
    if (*evolve) return cmd_evolve(evolve_opt, count, out_dir);
    if (*generate) return cmd_generate(gen_dir, gen_count, gen_seed);
  } catch (const toc::Error& e) {
    std::cerr << "toc: " << e.what() << "\n";
    switch (e.kind()) {
      case toc::ErrorKind::protocol_error: return kExitProtocol;
      case toc::ErrorKind::config_error:
      case toc::ErrorKind::suite_error:
      case toc::ErrorKind::template_error: return kExitConfig;
      default: return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "toc: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
