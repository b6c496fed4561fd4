#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include "support.hpp"
#include "toc/error.hpp"
#include "toc/execution.hpp"

using namespace toc;

namespace {

ExecCall call(std::string code) {
  ExecCall c;
  c.code = std::move(code);
  return c;
}

// Sleeps for the number of milliseconds in the code and echoes it back.
class SlowEcho final : public CodeExecutor {
 public:
  explicit SlowEcho(std::atomic<int>& live, std::atomic<int>& peak) : live_(live), peak_(peak) {}

  ExecutionOutcome run(const ExecCall& c) override {
    const int now = ++live_;
    for (int seen = peak_; now > seen && !peak_.compare_exchange_weak(seen, now);) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(std::stoi(c.code)));
    --live_;
    return testing::ok(c.code);
  }

 private:
  std::atomic<int>& live_;
  std::atomic<int>& peak_;
};

}  // namespace

TEST_SUITE("execution") {

TEST_CASE("classify_outcome") {
  CHECK(classify_outcome(testing::ok("42")) == NodeStatus::success);
  ExecutionOutcome blank = testing::ok("");
  CHECK(classify_outcome(blank) == NodeStatus::failure);
  CHECK(classify_outcome(testing::failed(OutcomeStatus::exception)) == NodeStatus::failure);
  CHECK(classify_outcome(testing::failed(OutcomeStatus::timeout)) == NodeStatus::failure);
  CHECK(classify_outcome(testing::failed(OutcomeStatus::empty, "")) == NodeStatus::failure);
  CHECK(classify_outcome(testing::failed(OutcomeStatus::parse_failure)) == NodeStatus::failure);
}

TEST_CASE("scripted lookup returns the recorded outcome") {
  ScriptTable table;
  table.entries = {{CodeMatch::substring, "print(6*7)", testing::ok("42")},
                   {CodeMatch::exact, "raise", testing::failed(OutcomeStatus::exception, "ValueError: bad")}};
  CHECK(execute_scripted("x = 1\nprint(6*7)", table, {}) == testing::ok("42"));
  CHECK(execute_scripted("raise", table, {}).stderr_text == "ValueError: bad");
  const auto miss = execute_scripted("raise ValueError()", table, {});
  CHECK(miss.status == OutcomeStatus::exception);
  CHECK(miss.stderr_text == kScriptMiss);
}

TEST_CASE("first matching entry wins") {
  ScriptTable table;
  table.entries = {{CodeMatch::substring, "print", testing::ok("first")},
                   {CodeMatch::substring, "print(1)", testing::ok("second")}};
  CHECK(execute_scripted("print(1)", table, {}).value == "first");
}

TEST_CASE("script table JSON") {
  ScriptTable table;
  table.entries = {{CodeMatch::exact, "a", testing::ok("1")},
                   {CodeMatch::substring, "b", testing::failed(OutcomeStatus::timeout, "")}};
  const auto back = ScriptTable::from_json(table.to_json());
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].match == CodeMatch::exact);
  CHECK(back.entries[1].outcome == table.entries[1].outcome);
  CHECK_THROWS_AS(ScriptTable::from_json(nlohmann::json::object()), Error);
  CHECK_THROWS_AS(ScriptTable::from_json(nlohmann::json::parse(R"([{"match":"regex","pattern":"x","outcome":{}}])")),
                  Error);
}

TEST_CASE("limits validate") {
  CHECK_NOTHROW(ExecutorLimits{}.validate());
  ExecutorLimits bad;
  bad.timeout_ms = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("pool keeps input order and bounds concurrency") {
  std::atomic<int> live{0};
  std::atomic<int> peak{0};
  ExecutorPool pool([&] { return std::make_unique<SlowEcho>(live, peak); }, 3);
  const std::vector<ExecCall> calls{call("40"), call("5"), call("25"), call("1"), call("30"), call("10")};
  const auto outcomes = pool.run_all(calls);
  REQUIRE(outcomes.size() == calls.size());
  for (std::size_t i = 0; i < calls.size(); ++i) CHECK(outcomes[i].value == calls[i].code);
  CHECK(peak.load() <= 3);
  CHECK(peak.load() >= 2);
}

TEST_CASE("pool builds executors lazily and reuses them") {
  int built = 0;
  const auto table = std::make_shared<const ScriptTable>();
  ExecutorPool pool(
      [&] {
        ++built;
        return std::make_unique<ScriptedExecutor>(table);
      },
      4);
  CHECK(pool.slots() == 4);
  CHECK(built == 0);
  for (int i = 0; i < 5; ++i) CHECK(pool.run(call("x")).stderr_text == kScriptMiss);
  CHECK(built == 1);
}

TEST_CASE("pool rethrows executor failures") {
  struct Exploding final : CodeExecutor {
    ExecutionOutcome run(const ExecCall&) override { throw Error(ErrorKind::protocol_error, "bad frame"); }
  };
  ExecutorPool pool([] { return std::make_unique<Exploding>(); }, 2);
  const std::vector<ExecCall> calls{call("a"), call("b")};
  CHECK_THROWS_AS(pool.run_all(calls), Error);
  CHECK_THROWS_AS(pool.run(call("c")), Error);
}

}  // TEST_SUITE
