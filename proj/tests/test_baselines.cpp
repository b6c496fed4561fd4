#include <doctest.h>

#include "support.hpp"
#include "toc/baselines.hpp"
#include "toc/error.hpp"
#include "toc/sandbox.hpp"

using namespace toc;
using testing::scripted;

namespace {

const ModelSpec kModel{"m", "", "", 0.1, 2048};

TranscriptEntry turn(int k, std::string reply) {
  return {MatcherKind::tag_and_ordinal, "node_generation:" + std::to_string(k), std::move(reply), 1, false};
}

ScriptedExecutor multiply_executor() {
  ScriptTable table;
  table.entries = {{CodeMatch::substring, "print(multiply(", testing::ok("42")}};
  return ScriptedExecutor(std::make_shared<const ScriptTable>(table));
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("react answers immediately") {
  Gateway gw(scripted({turn(1, R"(<thought>easy</thought><action>{"final_answer": "42"}</action>)")}));
  auto executor = multiply_executor();
  const auto run = react_loop(testing::make_task(), kModel, gw, executor);
  CHECK(run.turns == 1);
  CHECK(run.terminated_by == Termination::answer);
  CHECK(run.final_answer == std::optional<std::string>("42"));
  CHECK(run.correct);
}

TEST_CASE("react calls a tool, then answers") {
  Gateway gw(scripted({turn(1, R"(<action>{"tool": "multiply", "arguments": {"a": 6, "b": 7}}</action>)"),
                       turn(2, R"(<action>{"final_answer": "It is 42."}</action>)")}));
  auto executor = multiply_executor();
  const auto run = react_loop(testing::make_task(), kModel, gw, executor);
  CHECK(run.turns == 2);
  REQUIRE(run.steps.size() == 2);
  CHECK(run.steps[0].observation == "42");
  CHECK(run.correct);
  CHECK(gw.call_count(RequestTag::node_generation) == 2);
}

TEST_CASE("react prompt carries earlier observations") {
  Gateway gw(scripted({turn(1, R"(<action>{"tool": "multiply", "arguments": {"a": 6, "b": 7}}</action>)"),
                       {MatcherKind::substring, "Observation:\n42\n", R"(<action>{"final_answer": "42"}</action>)", 1, false}}));
  auto executor = multiply_executor();
  CHECK(react_loop(testing::make_task(), kModel, gw, executor).turns == 2);
}

TEST_CASE("react stops at the step limit") {
  Gateway gw(scripted({{MatcherKind::substring, "", R"(<action>{"tool": "divide"}</action>)", 0, false}}));
  auto executor = multiply_executor();
  const auto run = react_loop(testing::make_task(), kModel, gw, executor, 10);
  CHECK(run.turns == 10);
  CHECK(run.terminated_by == Termination::step_limit);
  CHECK_FALSE(run.correct);
  CHECK(run.steps.back().observation == "Error: unknown tool 'divide'");
}

TEST_CASE("react action parsing") {
  CHECK(parse_react_action("no json").kind == ReactAction::Kind::invalid);
  CHECK(parse_react_action("{broken").kind == ReactAction::Kind::invalid);
  CHECK(parse_react_action(R"({"tool": "t", "arguments": [1]})").kind == ReactAction::Kind::invalid);
  CHECK(parse_react_action(R"({"final_answer": 42})").answer == "42");
  const auto a = parse_react_action(R"(prefix <action>{"tool": "t", "arguments": {"x": "y"}}</action>)");
  CHECK(a.kind == ReactAction::Kind::tool);
  CHECK(a.tool == "t");
  CHECK(a.arguments["x"] == "y");
  CHECK(tool_call_code("t", {{"x", "it's"}}) ==
        "import json\nprint(t(**json.loads(\"{\\\"x\\\":\\\"it's\\\"}\")))");
}

TEST_CASE("backend errors end a baseline run") {
  Gateway gw(scripted({}));
  auto executor = multiply_executor();
  const auto run = react_loop(testing::make_task(), kModel, gw, executor);
  CHECK(run.terminated_by == Termination::error);
  CHECK(run.turns == 1);
  CHECK(run.error.find("transcript_miss") != std::string::npos);
  CHECK_THROWS_AS(react_loop(testing::make_task(), kModel, gw, executor, 0), Error);
}

TEST_CASE("codeact ends on a ground-truth match") {
  Gateway gw(scripted({turn(1, "<execute>print(multiply(6, 7))</execute>")}));
  auto executor = multiply_executor();
  const auto run =
      codeact_loop(testing::make_task(), kModel, gw, executor, 10, CodeActTermination::gt_match);
  CHECK(run.turns == 1);
  CHECK(run.terminated_by == Termination::gt_match);
  CHECK(run.correct);
}

TEST_CASE("codeact hits the step cap") {
  Gateway gw(scripted({{MatcherKind::substring, "", "<execute>print(1)</execute>", 0, false}}));
  ScriptTable table;
  table.entries = {{CodeMatch::substring, "print(1)", testing::ok("1")}};
  ScriptedExecutor executor(std::make_shared<const ScriptTable>(table));
  const auto run =
      codeact_loop(testing::make_task(), kModel, gw, executor, 10, CodeActTermination::gt_match);
  CHECK(run.turns == 10);
  CHECK(run.terminated_by == Termination::step_limit);
  CHECK_FALSE(run.correct);
}

TEST_CASE("codeact answers through a solution tag") {
  Gateway gw(scripted({turn(1, "<execute>print(multiply(6, 7))</execute>"),
                       turn(2, "The product is known. <solution>42</solution>")}));
  auto executor = multiply_executor();
  const auto run = codeact_loop(testing::make_task(), kModel, gw, executor);
  CHECK(run.turns == 2);
  CHECK(run.terminated_by == Termination::answer);
  CHECK(run.final_answer == std::optional<std::string>("42"));
  CHECK(run.correct);
  CHECK(run.output_words == count_output_words("<execute>print(multiply(6, 7))</execute>") +
                                count_output_words("The product is known. <solution>42</solution>"));
}

TEST_CASE("codeact keeps its namespace across turns") {
  Gateway gw(scripted({turn(1, "<thought>store it</thought><execute>x = 6</execute>"),
                       turn(2, "<execute>print(x * 7)</execute>")}));
  SandboxExecutor executor(FAKE_WORKER_PATH, {});
  const auto run =
      codeact_loop(testing::make_task(), kModel, gw, executor, 10, CodeActTermination::gt_match);
  CHECK(run.turns == 2);
  CHECK(run.correct);
  REQUIRE(run.steps.size() == 2);
  CHECK(run.steps[0].observation == "[no output]");
  CHECK(run.steps[1].observation == "42");
}

TEST_CASE("codeact replies without code are noted") {
  Gateway gw(scripted({turn(1, "Let me think."), turn(2, "<solution>41</solution>")}));
  auto executor = multiply_executor();
  const auto run = codeact_loop(testing::make_task(), kModel, gw, executor);
  CHECK(run.steps[0].observation == "No <execute> block found in the reply.");
  CHECK(run.turns == 2);
  CHECK_FALSE(run.correct);
}

TEST_CASE("baseline runs serialize") {
  BaselineRun run;
  run.turns = 3;
  run.final_answer = "42";
  run.terminated_by = Termination::gt_match;
  const nlohmann::json doc = run;
  CHECK(doc["turns"] == 3);
  CHECK(doc["terminated_by"] == "gt_match");
  CHECK(doc["final_answer"] == "42");
}

}  // TEST_SUITE
