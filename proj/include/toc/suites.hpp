#pragma once

// Desk-scale task suites and scripted run fixtures. Every expected answer is
// computed here by a reference implementation of the suite's tools.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "toc/bench.hpp"
#include "toc/helpers.hpp"

namespace toc::suites {

// Reference tool implementations.
std::string caesar_shift(std::string_view text, int shift);
std::string to_hex(std::string_view text);
std::string from_hex(std::string_view hex);
std::string reverse_text(std::string_view text);

struct TradeOrder {
  std::vector<std::pair<std::string, int>> lines;  // item, quantity
  int discount_percent = 0;
  int tax_percent = 0;
};
const std::vector<std::pair<std::string, std::int64_t>>& price_catalog();
std::int64_t unit_price(const std::string& item);
std::int64_t apply_discount(std::int64_t amount_cents, int percent);  // rounds down
std::int64_t add_tax(std::int64_t amount_cents, int percent);         // rounds half up
std::int64_t order_total(const TradeOrder& order);

// A suite with its expected answers, in task order.
struct GeneratedSuite {
  SuiteFile suite;
  std::vector<std::string> answers;
};

GeneratedSuite message_decoder(int count, std::uint64_t seed);
GeneratedSuite trade_calculator(int count, std::uint64_t seed);
GeneratedSuite api_chain(int count, std::uint64_t seed);

struct WebSuite {
  GeneratedSuite generated;
  BrowserState site;
};
WebSuite toy_web(int count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Scripted runs

// What one scripted node or step does when executed.
enum class Behavior { correct, wrong, exception, empty, timeout, unparseable };

// Tree runs: layers[l][m] is the behavior of node (l+1, m+1). Every layer
// must hold exactly `width` entries; layers the tree never reaches are
// simply left unused.
struct TreeScript {
  std::string task_id;
  std::vector<std::vector<Behavior>> layers;
  std::string wrong_answer = "42";
};

// Builds a transcript plus script table that drives ToC runs over `suite`
// with the given per-task behaviors. `answers` holds the expected answer of
// each scripted task, in the same order as `scripts`.
ScriptedBundle script_tree_runs(const SuiteFile& suite, const std::vector<TreeScript>& scripts,
                                const std::vector<std::string>& answers);

// Baseline step sequence for one task. `solve` steps end CodeAct runs in
// answer_tag mode; `run` steps execute code.
struct StepScript {
  enum class Kind { run, solve, ramble } kind = Kind::run;
  Behavior behavior = Behavior::correct;  // for run steps
  bool correct = true;                     // for solve steps
};
struct BaselineScript {
  std::string task_id;
  std::vector<StepScript> steps;
  std::string wrong_answer = "42";
};
ScriptedBundle script_codeact_runs(const SuiteFile& suite, const std::vector<BaselineScript>& scripts,
                                   const std::vector<std::string>& answers);

// The twelve-task comparison fixture: ToC(3-3) scores 10/12 and the CodeAct
// loop (answer_tag) scores 6/12 with more turns.
struct ComparisonFixture {
  SuiteFile suite;
  std::vector<std::string> answers;
  ScriptedBundle toc;
  ScriptedBundle codeact;
};
ComparisonFixture comparison_fixture();

// Scripted ToC runs whose trees stop at the given layer counts, all correct.
struct TurnFixture {
  SuiteFile suite;
  ScriptedBundle bundle;
};
TurnFixture turn_fixture(const std::vector<int>& stop_layers, int width = 3);

// One all-correct layer-1 program per task, for smoke runs of a generated
// suite under the scripted backend.
ScriptedBundle oracle_bundle(const GeneratedSuite& generated, int width = 3);

}  // namespace toc::suites
