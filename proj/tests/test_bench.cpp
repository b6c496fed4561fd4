#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "support.hpp"
#include "toc/bench.hpp"
#include "toc/codeprogram.hpp"
#include "toc/error.hpp"
#include "toc/sandbox.hpp"
#include "toc/suites.hpp"

using namespace toc;
namespace fs = std::filesystem;
using suites::Behavior;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("toc-bench-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Pools scripted_pools() { return {default_prompt_pool(), {{"scripted", "", "", 0.1, 2048}}}; }

Strategy toc_strategy(int depth = 3, int width = 3) {
  Strategy s;
  s.tree.depth = depth;
  s.tree.width = width;
  return s;
}

int run_cli(const std::string& args) {
  const std::string command = std::string(TOC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kMinimalSuite = R"json({
  "suite_id": "mini",
  "tool_bindings": {"multiply": "math.multiply"},
  "tasks": [{
    "id": "t1",
    "query": "What is six times seven?",
    "tools": [{"name": "multiply", "description": "Multiplies.", "fn_signature": "multiply(a, b)", "output_example": "42"}],
    "checker": {"mode": "keywords_all", "terms": ["42"]}
  }]
})json";

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("minimal suite loads") {
  const auto suite = parse_suite(nlohmann::json::parse(kMinimalSuite));
  CHECK(suite.suite_id == "mini");
  REQUIRE(suite.tasks.size() == 1);
  CHECK(suite.find("t1") != nullptr);
  CHECK(suite.find("t2") == nullptr);
  CHECK(suite.tool_bindings.at("multiply") == "math.multiply");
}

TEST_CASE("suite errors name the field") {
  auto doc = nlohmann::json::parse(kMinimalSuite);
  doc["tool_bindings"] = nlohmann::json::object();
  try {
    parse_suite(doc);
    FAIL("expected suite_error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::suite_error);
    CHECK(std::string(e.what()).find("tasks[0].tools[0]") != std::string::npos);
  }

  doc = nlohmann::json::parse(kMinimalSuite);
  doc["tasks"].push_back(doc["tasks"][0]);
  try {
    parse_suite(doc);
    FAIL("expected suite_error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("tasks[1].id") != std::string::npos);
  }

  doc = nlohmann::json::parse(kMinimalSuite);
  doc["tasks"][0].erase("checker");
  CHECK_THROWS_AS(parse_suite(doc), Error);
  CHECK_THROWS_AS(parse_suite(nlohmann::json::array()), Error);
  CHECK_THROWS_AS(load_suite(scratch("missing") / "none.json"), Error);
}

TEST_CASE("generated suites round trip through files") {
  const auto dir = scratch("generated");
  const auto generated = suites::trade_calculator(50, 3);
  save_suite(generated.suite, dir / "trade.json");
  const auto back = load_suite(dir / "trade.json");
  REQUIRE(back.tasks.size() == 50);
  std::set<std::string> ids;
  for (const auto& task : back.tasks) ids.insert(task.id);
  CHECK(ids.size() == 50);
  CHECK(suite_to_json(back) == suite_to_json(generated.suite));
  CHECK(generated.answers.size() == 50);
  for (std::size_t i = 0; i < 50; ++i) CHECK(check_answer(generated.answers[i], back.tasks[i].checker));
}

TEST_CASE("reference tools") {
  CHECK(suites::caesar_shift("abc xyz", 3) == "def abc");
  CHECK(suites::caesar_shift(suites::caesar_shift("Hello", 5), 21) == "Hello");
  CHECK(suites::to_hex("Hi") == "4869");
  CHECK(suites::from_hex("4869") == "Hi");
  CHECK(suites::reverse_text("abc") == "cba");
  CHECK(suites::apply_discount(999, 10) == 899);
  CHECK(suites::add_tax(1000, 7) == 1070);
  CHECK(suites::add_tax(150, 5) == 158);
  suites::TradeOrder order{{{"apple", 2}, {"milk", 1}}, 10, 5};
  // (250 + 199) = 449; 10% off rounds down to 404; 5% tax on 404 = 424.2 -> 424.
  CHECK(suites::order_total(order) == 424);
}

TEST_CASE("every generated suite has checkable answers") {
  const std::vector<suites::GeneratedSuite> all{suites::message_decoder(20, 7), suites::trade_calculator(20, 7),
                                                suites::api_chain(20, 7), suites::toy_web(20, 7).generated};
  for (const auto& generated : all) {
    INFO(generated.suite.suite_id);
    CHECK_NOTHROW(parse_suite(suite_to_json(generated.suite)));
    REQUIRE(generated.answers.size() == generated.suite.tasks.size());
    for (std::size_t i = 0; i < generated.answers.size(); ++i) {
      CHECK(check_answer(generated.answers[i], generated.suite.tasks[i].checker));
    }
  }
}

TEST_CASE("oracle bundles solve their suites") {
  const auto generated = suites::api_chain(6, 11);
  const auto env = scripted_environment(suites::oracle_bundle(generated), scripted_pools());
  const auto report = run_benchmark(generated.suite, toc_strategy(), env, 1);
  const auto agg = report.aggregates();
  REQUIRE(agg.size() == 1);
  CHECK(agg[0].accuracy == doctest::Approx(1.0));
  CHECK(agg[0].avg_turns == doctest::Approx(1.0));
}

TEST_CASE("three of four correct") {
  const auto generated = suites::trade_calculator(4, 5);
  std::vector<suites::TreeScript> scripts;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto b = i == 2 ? Behavior::wrong : Behavior::correct;
    scripts.push_back({generated.suite.tasks[i].id, {{b, b, b}}});
  }
  const auto bundle = suites::script_tree_runs(generated.suite, scripts, generated.answers);
  const auto report = run_benchmark(generated.suite, toc_strategy(), scripted_environment(bundle, scripted_pools()), 1);
  REQUIRE(report.rows.size() == 4);
  CHECK_FALSE(report.rows[2].correct);
  CHECK(report.aggregates().at(0).accuracy == doctest::Approx(0.75));
  CHECK(format_table(report).find("75.0%") != std::string::npos);
}

TEST_CASE("average turns") {
  SUBCASE("every tree stops at layer one") {
    const auto fixture = suites::turn_fixture({1, 1, 1, 1});
    const auto report =
        run_benchmark(fixture.suite, toc_strategy(), scripted_environment(fixture.bundle, scripted_pools()), 1);
    CHECK(report.aggregates().at(0).avg_turns == doctest::Approx(1.0));
    CHECK(report.aggregates().at(0).accuracy == doctest::Approx(1.0));
  }
  SUBCASE("mixed stopping layers") {
    const auto fixture = suites::turn_fixture({1, 1, 2, 3});
    const auto report =
        run_benchmark(fixture.suite, toc_strategy(), scripted_environment(fixture.bundle, scripted_pools()), 1);
    std::vector<int> turns;
    for (const auto& row : report.rows) turns.push_back(row.turns);
    CHECK(turns == std::vector<int>{1, 1, 2, 3});
    CHECK(report.aggregates().at(0).avg_turns == doctest::Approx(1.75));
    CHECK(format_table(report).find("1.75") != std::string::npos);
  }
}

TEST_CASE("table layout") {
  BenchReport empty;
  const auto header = format_table(empty);
  CHECK(header.find("Strategy") == 0);
  CHECK(header.find("Avg Turns") < header.find("Correct"));
  CHECK(header.find("Correct") < header.find("Output Words"));
  CHECK(std::count(header.begin(), header.end(), '\n') == 1);

  BenchReport two;
  two.rows = {{"a", "ToC(3-3)", true, 1, 100, 0, ""},
              {"a", "CodeAct", false, 4, 300, 0, ""},
              {"b", "ToC(3-3)", false, 2, 50, 0, ""}};
  const auto aggregates = two.aggregates();
  REQUIRE(aggregates.size() == 2);
  CHECK(aggregates[0].strategy == "ToC(3-3)");
  CHECK(aggregates[0].tasks == 2);
  CHECK(aggregates[0].avg_turns == doctest::Approx(1.5));
  CHECK(aggregates[0].avg_output_words == doctest::Approx(75.0));
  const auto table = format_table(two);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);
  CHECK(table.find("ToC(3-3)") != std::string::npos);
  CHECK(table.find("50.0%") != std::string::npos);
}

TEST_CASE("strategy labels") {
  CHECK(toc_strategy(3, 3).label() == "ToC(3-3)");
  CHECK(toc_strategy(1, 2).label() == "ToC(1-2)");
  Strategy react;
  react.kind = StrategyKind::react;
  CHECK(react.label() == "ReAct");
  Strategy codeact;
  codeact.kind = StrategyKind::codeact;
  CHECK(codeact.label() == "CodeAct");
  codeact.termination = CodeActTermination::gt_match;
  CHECK(codeact.label() == "CodeAct(gt-match)");
}

TEST_CASE("structured reports round trip") {
  BenchReport report;
  report.rows = {{"a", "ToC(3-3)", true, 1, 100, 12, ""}, {"b", "ToC(3-3)", false, 3, 250, 40, "backend_error: x"}};
  report.protocol_errors = 1;
  const auto dir = scratch("report");
  emit_report(report, dir / "r.json", ReportFormat::structured);
  std::ifstream in(dir / "r.json");
  const auto back = report_from_json(nlohmann::json::parse(in));
  CHECK(back == report);
  CHECK(back.protocol_errors == 1);
  CHECK(back.aggregates() == report.aggregates());

  emit_report(report, dir / "r.txt", ReportFormat::table_text);
  std::ifstream text(dir / "r.txt");
  std::string first;
  std::getline(text, first);
  CHECK(first.rfind("Strategy", 0) == 0);
}

TEST_CASE("unwritable report path") {
  try {
    emit_report({}, "/proc/toc-no-such-dir/report.json", ReportFormat::structured);
    FAIL("expected io_error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io_error);
  }
}

TEST_CASE("task failures become notes") {
  const auto suite = parse_suite(nlohmann::json::parse(kMinimalSuite));
  ScriptedBundle empty;
  const auto report = run_benchmark(suite, toc_strategy(), scripted_environment(empty, scripted_pools()), 1);
  REQUIRE(report.rows.size() == 1);
  CHECK_FALSE(report.rows[0].correct);
  CHECK(report.protocol_errors == 0);
}

TEST_CASE("protocol errors are counted") {
  const auto suite = parse_suite(nlohmann::json::parse(kMinimalSuite));
  ScriptedBundle bundle;
  bundle.transcript.entries = {{MatcherKind::substring, "", format_tagged("emit junk", "garbage()"), 0, false}};
  auto env = scripted_environment(bundle, scripted_pools());
  env.executor = [] { return std::make_unique<SandboxExecutor>(FAKE_WORKER_PATH, ExecutorLimits{}); };
  const auto report = run_benchmark(suite, toc_strategy(1, 1), env, 1);
  CHECK(report.protocol_errors == 1);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].note.find("protocol_error") != std::string::npos);
}

TEST_CASE("reports are deterministic") {
  const auto fixture = suites::comparison_fixture();
  const auto env = scripted_environment(fixture.toc, scripted_pools());
  const auto a = report_to_json(run_benchmark(fixture.suite, toc_strategy(), env, 42, 1)).dump();
  const auto b = report_to_json(run_benchmark(fixture.suite, toc_strategy(), env, 42, 4)).dump();
  CHECK(a == b);
}

TEST_CASE("comparison fixture") {
  const auto fixture = suites::comparison_fixture();
  const auto toc_report =
      run_benchmark(fixture.suite, toc_strategy(), scripted_environment(fixture.toc, scripted_pools()), 7);
  Strategy codeact;
  codeact.kind = StrategyKind::codeact;
  const auto codeact_report =
      run_benchmark(fixture.suite, codeact, scripted_environment(fixture.codeact, scripted_pools()), 7);
  const auto t = toc_report.aggregates().at(0);
  const auto c = codeact_report.aggregates().at(0);
  CHECK(t.accuracy == doctest::Approx(10.0 / 12.0));
  CHECK(c.accuracy == doctest::Approx(6.0 / 12.0));
  CHECK(c.avg_turns > t.avg_turns);
}

TEST_CASE("ablation grid") {
  const auto fixture = suites::turn_fixture({1, 2});
  const auto cells = run_ablation(fixture.suite, TreeConfig{}, scripted_environment(fixture.bundle, scripted_pools()),
                                  1, 2, 3);
  CHECK(cells.size() == 6);
  const auto grid = format_ablation(cells);
  CHECK(grid.find("Layer \\ Node Per Layer") != std::string::npos);
}

TEST_CASE("scripted bundles round trip") {
  const auto fixture = suites::turn_fixture({1, 3});
  const auto dir = scratch("bundle");
  fixture.bundle.save(dir / "b.json");
  const auto back = ScriptedBundle::load(dir / "b.json");
  CHECK(back.to_json() == fixture.bundle.to_json());
  CHECK_THROWS_AS(ScriptedBundle::load(dir / "missing.json"), Error);
}

TEST_CASE("command line exit codes") {
  const auto dir = scratch("cli");
  const auto fixture = suites::comparison_fixture();
  save_suite(fixture.suite, dir / "suite.json");
  fixture.toc.save(dir / "toc.json");
  const std::string suite = (dir / "suite.json").string();

  CHECK(run_cli("bench --suite " + suite + " --backend scripted:" + (dir / "toc.json").string()) == 0);
  CHECK(run_cli("bench --suite " + suite + " --backend carrier-pigeon:x") == 2);
  CHECK(run_cli("bench --suite " + (dir / "nope.json").string() + " --backend scripted:x") == 2);
  CHECK(run_cli("bench --suite " + suite + " --backend scripted:" + (dir / "toc.json").string() + " --width 0") == 2);
  CHECK(run_cli("frobnicate") == 2);

  const auto mini = parse_suite(nlohmann::json::parse(kMinimalSuite));
  save_suite(mini, dir / "mini.json");
  ScriptedBundle junk;
  junk.transcript.entries = {{MatcherKind::substring, "", format_tagged("emit junk", "garbage()"), 0, false}};
  junk.save(dir / "junk.json");
  CHECK(run_cli("bench --suite " + (dir / "mini.json").string() + " --backend scripted:" + (dir / "junk.json").string() +
                " --worker " + FAKE_WORKER_PATH + " --depth 1 --width 1") == 3);
  CHECK(run_cli("run --task t1 --suite " + (dir / "mini.json").string() + " --backend scripted:" +
                (dir / "junk.json").string() + " --worker " + FAKE_WORKER_PATH + " --depth 1 --width 1") == 3);
}

}  // TEST_SUITE
