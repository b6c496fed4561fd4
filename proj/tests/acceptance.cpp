// Acceptance checks for the engine. Prints one PASS/FAIL line per check and
// exits non-zero when any check fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "toc/aggregator.hpp"
#include "toc/bench.hpp"
#include "toc/codeprogram.hpp"
#include "toc/error.hpp"
#include "toc/helpers.hpp"
#include "toc/sampling.hpp"
#include "toc/suites.hpp"
#include "toc/text.hpp"
#include "toc/tree.hpp"

using namespace toc;
using suites::Behavior;

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return sampling::splitmix64(state_);
  }
  std::size_t below(std::size_t n) { return sampling::uniform_index(next(), n); }
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1))); }

 private:
  std::uint64_t state_;
};

// Collects the first few problems of a check.
struct Problems {
  std::vector<std::string> items;
  std::size_t total = 0;

  void add(const std::string& what) {
    if (++total <= 3) items.push_back(what);
  }
  explicit operator bool() const { return total > 0; }
  std::string describe() const {
    std::string out = std::to_string(total) + " problem(s)";
    for (const auto& item : items) out += "; " + item;
    return out;
  }
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

Pools scripted_pools() { return {default_prompt_pool(), {{"scripted", "", "", 0.1, 2048}}}; }

bool succeeds(Behavior b) { return b == Behavior::correct || b == Behavior::wrong; }

// ---------------------------------------------------------------------------

struct TreeRun {
  TreeRecord tree;
  std::size_t generation_calls = 0;
};

TreeRun grow_scripted(const suites::GeneratedSuite& generated, const suites::TreeScript& script,
                      const TreeConfig& config, std::uint64_t seed) {
  const auto bundle = suites::script_tree_runs(generated.suite, {script}, {generated.answers.front()});
  const auto env = scripted_environment(bundle, scripted_pools());
  Gateway gateway(env.backend());
  ExecutorPool executor(env.executor, static_cast<std::size_t>(config.width));
  const auto& task = generated.suite.tasks.front();
  TreeRun run{grow_tree(task, config, env.pools, executor, gateway, task_seed(seed, task.id)), 0};
  run.generation_calls = gateway.call_count(RequestTag::node_generation);
  return run;
}

void check_shape(const TreeRecord& tree, const suites::TreeScript& script, const TreeConfig& config,
                 Problems& problems) {
  const auto where = "L=" + std::to_string(config.depth) + " M=" + std::to_string(config.width) + ": ";

  int expected_layers = 1;
  while (expected_layers < config.depth) {
    const auto& layer = script.layers[static_cast<std::size_t>(expected_layers - 1)];
    if (std::all_of(layer.begin(), layer.end(), succeeds)) break;
    ++expected_layers;
  }
  if (tree.layers_used != expected_layers) {
    problems.add(where + "layers_used " + std::to_string(tree.layers_used) + " != " + std::to_string(expected_layers));
  }
  if (tree.layers_used > config.depth || tree.metrics.turns != tree.layers_used) {
    problems.add(where + "depth or turns out of bounds");
  }

  std::map<int, int> per_layer;
  std::set<std::string> successes;
  for (const auto& node : tree.nodes) {
    ++per_layer[node.layer];
    if (node.layer > config.depth) problems.add(where + node.id + " exceeds depth");
    const auto expected = succeeds(script.layers[static_cast<std::size_t>(node.layer - 1)]
                                                [static_cast<std::size_t>(node.index - 1)]);
    if ((node.status == NodeStatus::success) != expected) problems.add(where + node.id + " has the wrong status");
    if (node.status == NodeStatus::success) successes.insert(node.id);
    if (node.layer == 1) {
      if (node.parent_id) problems.add(where + node.id + " is a root with a parent");
      continue;
    }
    const auto* parent = node.parent_id ? tree.find(*node.parent_id) : nullptr;
    if (parent == nullptr || parent->layer != node.layer - 1 || parent->status != NodeStatus::failure) {
      problems.add(where + node.id + " does not descend from a failing node of the previous layer");
    }
  }
  for (const auto& [layer, count] : per_layer) {
    if (count > config.width || (layer == 1 && count != config.width)) {
      problems.add(where + "layer " + std::to_string(layer) + " has " + std::to_string(count) + " nodes");
    }
  }
  const std::set<std::string> collected(tree.collected.begin(), tree.collected.end());
  if (collected != successes || collected.size() != tree.collected.size()) {
    problems.add(where + "collected differs from the successful nodes");
  }
}

// Random trees: shape invariants and one generation call per node.
struct RandomTreeResults {
  Problems shape;
  Problems calls;
  std::size_t trees = 0;
  std::size_t nodes = 0;
  double seconds = 0;
};

RandomTreeResults random_trees(std::size_t count) {
  RandomTreeResults results;
  Rng rng(20241218);
  static constexpr Behavior kBehaviors[] = {Behavior::correct, Behavior::wrong,   Behavior::exception,
                                            Behavior::empty,   Behavior::timeout, Behavior::unparseable};
  const auto started = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < count; ++i) {
    TreeConfig config;
    config.depth = rng.between(1, 4);
    config.width = rng.between(1, 4);
    // Bias towards failures so deeper layers get exercised.
    const auto fail_bias = rng.below(3);
    const auto generated = suites::trade_calculator(1, rng.next());
    suites::TreeScript script{generated.suite.tasks.front().id, {}};
    for (int l = 0; l < config.depth; ++l) {
      std::vector<Behavior> layer;
      for (int m = 0; m < config.width; ++m) {
        const auto pick = rng.below(6 + fail_bias * 4);
        layer.push_back(pick < 6 ? kBehaviors[pick] : kBehaviors[2 + pick % 4]);
      }
      script.layers.push_back(std::move(layer));
    }
    try {
      const auto run = grow_scripted(generated, script, config, rng.next());
      check_shape(run.tree, script, config, results.shape);
      if (run.generation_calls != run.tree.nodes.size()) {
        results.calls.add("tree " + std::to_string(i) + ": " + std::to_string(run.generation_calls) + " calls for " +
                          std::to_string(run.tree.nodes.size()) + " nodes");
      }
      results.nodes += run.tree.nodes.size();
    } catch (const std::exception& e) {
      results.shape.add(std::string("tree ") + std::to_string(i) + " threw: " + e.what());
    }
    ++results.trees;
  }
  results.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return results;
}

Outcome tree_shape(const RandomTreeResults& r) {
  std::ostringstream detail;
  detail << r.trees << " trees, " << r.nodes << " nodes in " << r.seconds << " s";
  if (r.shape) return {false, detail.str() + "; " + r.shape.describe()};
  if (r.seconds >= 10.0) return {false, detail.str() + " (limit 10 s)"};
  return {r.trees >= 1000, detail.str()};
}

Outcome one_call_per_node(const RandomTreeResults& r) {
  if (r.calls) return {false, r.calls.describe()};

  // The committed fixtures as well.
  const auto fixture = suites::comparison_fixture();
  const auto env = scripted_environment(fixture.toc, scripted_pools());
  std::size_t nodes = r.nodes;
  for (const auto& task : fixture.suite.tasks) {
    Gateway gateway(env.backend());
    ExecutorPool executor(env.executor, 3);
    const auto tree = grow_tree(task, TreeConfig{}, env.pools, executor, gateway, task_seed(0, task.id));
    if (gateway.call_count(RequestTag::node_generation) != tree.nodes.size()) {
      return {false, task.id + ": call count differs from node count"};
    }
    nodes += tree.nodes.size();
  }
  return {true, std::to_string(nodes) + " nodes, one generation call each"};
}

// ---------------------------------------------------------------------------

Outcome stop_rule() {
  // Layer-1 statuses of nodes 1-1, 1-2, 1-3 ('s' success, 'f' failure) and
  // the parents of layer-2 nodes 2-1, 2-2, 2-3; empty means stop.
  const std::vector<std::pair<std::string, std::vector<std::string>>> oracle = {
      {"sss", {}},
      {"fss", {"1-1", "1-1", "1-1"}},
      {"sfs", {"1-2", "1-2", "1-2"}},
      {"ssf", {"1-3", "1-3", "1-3"}},
      {"ffs", {"1-1", "1-2", "1-1"}},
      {"fsf", {"1-1", "1-3", "1-1"}},
      {"sff", {"1-2", "1-3", "1-2"}},
      {"fff", {"1-1", "1-2", "1-3"}},
  };
  const auto generated = suites::trade_calculator(1, 404);
  TreeConfig config;
  config.depth = 2;
  config.width = 3;
  for (const auto& [pattern, parents] : oracle) {
    std::vector<NodeStatusEntry> statuses;
    std::vector<Behavior> layer1;
    for (int m = 0; m < 3; ++m) {
      const bool ok = pattern[static_cast<std::size_t>(m)] == 's';
      statuses.emplace_back(make_node_id(1, m + 1), ok ? NodeStatus::success : NodeStatus::failure);
      layer1.push_back(ok ? Behavior::correct : Behavior::exception);
    }

    const auto plan = plan_next_layer(statuses, 3, 2);
    std::vector<std::string> planned;
    if (plan) {
      for (const auto& a : plan->assignments) planned.push_back(a.parent_id.value_or("?"));
    }
    if (planned != parents) return {false, "plan for " + pattern + " differs from the oracle"};

    const auto run = grow_scripted(
        generated,
        {generated.suite.tasks.front().id, {layer1, {Behavior::exception, Behavior::exception, Behavior::exception}}},
        config, 1);
    std::vector<std::string> grown;
    for (const auto* node : run.tree.layer(2)) grown.push_back(node->parent_id.value_or("?"));
    if (grown != parents) return {false, "grown tree for " + pattern + " differs from the oracle"};
    if (run.tree.layers_used != (parents.empty() ? 1 : 2)) return {false, "layers_used wrong for " + pattern};
  }
  return {true, "8/8 patterns match"};
}

Outcome turn_accounting() {
  auto avg_turns = [](const std::vector<int>& stops) {
    const auto fixture = suites::turn_fixture(stops);
    Strategy strategy;
    const auto report = run_benchmark(fixture.suite, strategy, scripted_environment(fixture.bundle, scripted_pools()), 1);
    return report.aggregates().at(0).avg_turns;
  };
  const double mixed = avg_turns({1, 1, 2, 3});
  const double flat = avg_turns({1, 1, 1, 1});
  std::ostringstream detail;
  detail << "[1,1,2,3] -> " << mixed << ", all layer 1 -> " << flat;
  return {mixed == 1.75 && flat == 1.0, detail.str()};
}

// ---------------------------------------------------------------------------

Outcome vote_oracle() {
  // Spellings grouped by the answer they denote; the oracle never calls the
  // normalizer.
  const std::vector<std::pair<std::string, int>> vocabulary = {
      {"42", 0},           {"42.0", 0},          {" 42 ", 0},     {"042", 0},
      {"San Francisco", 1}, {"san  francisco", 1}, {"SAN\tFRANCISCO", 1},
      {"1,000", 2},        {"1000", 2},          {"1000.00", 2},
      {"41", 3},           {"x", 4},             {"X", 4},
  };
  Rng rng(77);
  Problems problems;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto n = rng.between(1, 9);
    std::set<std::pair<int, int>> used;
    std::vector<NodeRecord> nodes;
    std::vector<int> classes;
    while (static_cast<int>(nodes.size()) < n) {
      const int layer = rng.between(1, 3);
      const int index = rng.between(1, 12);
      if (!used.insert({layer, index}).second) continue;
      const auto& [spelling, cls] = vocabulary[rng.below(vocabulary.size())];
      NodeRecord node;
      node.id = make_node_id(layer, index);
      node.layer = layer;
      node.index = index;
      node.status = NodeStatus::success;
      node.outcome.status = OutcomeStatus::ok;
      node.outcome.value = spelling;
      nodes.push_back(node);
      classes.push_back(cls);
    }

    std::map<int, int> counts;
    std::map<int, std::pair<int, int>> lowest;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      ++counts[classes[i]];
      const std::pair<int, int> key{nodes[i].layer, nodes[i].index};
      if (!lowest.count(classes[i]) || key < lowest[classes[i]]) lowest[classes[i]] = key;
    }
    int best = -1;
    for (const auto& [cls, count] : counts) {
      if (best < 0 || count > counts[best] || (count == counts[best] && lowest[cls] < lowest[best])) best = cls;
    }
    std::vector<std::pair<int, int>> expected;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (classes[i] == best) expected.emplace_back(nodes[i].layer, nodes[i].index);
    }
    std::sort(expected.begin(), expected.end());
    std::vector<std::string> expected_ids;
    for (const auto& [l, m] : expected) expected_ids.push_back(make_node_id(l, m));

    const auto vote = majority_vote(nodes);
    if (vote.supporters != expected_ids) {
      problems.add("trial " + std::to_string(trial) + ": supporters differ");
      continue;
    }
    if (vote.tally.size() != counts.size()) problems.add("trial " + std::to_string(trial) + ": tally size differs");
  }
  if (problems) return {false, problems.describe()};
  return {true, "10000 multisets agree with brute force"};
}

// ---------------------------------------------------------------------------

Outcome parser_suite() {
  Rng rng(5150);
  static constexpr std::string_view alphabet = "abcdefxyz0123456789 _=()+-*'\"\n\t";
  static constexpr std::string_view thought_strays[] = {"<execute>", "<thought>", "</execute>"};
  static constexpr std::string_view code_strays[] = {"<thought>", "</thought>", "<execute>"};
  auto random_text = [&](const std::string_view* strays) {
    std::string out;
    const auto len = rng.between(1, 60);
    for (int i = 0; i < len; ++i) {
      if (rng.below(25) == 0) {
        out += strays[rng.below(3)];
      } else {
        out += alphabet[rng.below(alphabet.size())];
      }
    }
    return std::string(text::trim(out));
  };

  Problems problems;
  int round_trips = 0;
  int malformed = 0;
  for (int i = 0; i < 5000; ++i) {
    const auto thought = random_text(thought_strays);
    const auto code = random_text(code_strays);
    if (thought.empty() || code.empty()) continue;
    const auto rendered = format_tagged(thought, code);
    const auto draft = parse_tagged(rendered);
    ++round_trips;
    if (!draft.parse_ok || draft.thought != thought || draft.code != code) {
      problems.add("round trip failed for thought '" + thought + "'");
    }

    // Break the rendering in one of several ways.
    std::string broken = rendered;
    switch (rng.below(4)) {
      case 0: broken.erase(broken.rfind("</execute>")); break;
      case 1: broken = format_tagged(" \n\t", code); break;
      case 2: broken = format_tagged(thought, "\n  "); break;
      case 3: broken = "<thought>" + thought + "\n" + code; break;
    }
    ++malformed;
    try {
      if (parse_tagged(broken).parse_ok) problems.add("malformed input parsed: " + broken.substr(0, 40));
    } catch (...) {
      problems.add("parser threw");
    }
  }
  for (int i = 0; i < 5000; ++i) {
    std::string noise;
    for (int k = rng.between(0, 12); k > 0; --k) {
      static constexpr std::string_view pieces[] = {"<thought>", "</thought>", "<execute>", "</execute>", "x", " ", "<"};
      noise += pieces[rng.below(7)];
    }
    try {
      const auto d = parse_tagged(noise);
      if (d.parse_ok && (d.thought.empty() || d.code.empty())) problems.add("empty span accepted");
    } catch (...) {
      problems.add("parser threw on noise");
    }
  }
  if (problems) return {false, problems.describe()};
  return {round_trips > 1000 && malformed > 1000,
          std::to_string(round_trips) + " round trips, " + std::to_string(malformed) + " malformed inputs"};
}

// ---------------------------------------------------------------------------

std::shared_ptr<ScriptedBackend> reply_with(MatcherKind kind, std::string value, std::string reply) {
  auto transcript = std::make_shared<Transcript>();
  transcript->entries = {{kind, std::move(value), std::move(reply), 1, false}};
  return std::make_shared<ScriptedBackend>(transcript);
}

Outcome helper_fixtures() {
  BrowserState site;
  site.pages["index"] = {"Staff directory. Clickable 'team'\n", "Clickable 'news'\n"};
  site.pages["team"] = {"Ada Park\n", "ada@example.org\n"};
  site.pages["news"] = {"Nothing new this week.\n"};
  site.current = "index";

  // No clickables on the page and no end(): back.
  {
    auto state = site;
    state.current = "news";
    ToyBrowser browser(state);
    Gateway gw(reply_with(MatcherKind::substring, "", "<action>click_url('x')</action>"));
    const auto d = next_action("Who runs the team?", browser.view(), {}, gw, browser, "m");
    if (d.action != BrowseAction::go_to_previous_page) return {false, "no-clickables override missed"};
  }
  // Everything already visited and no end(): back.
  {
    ToyBrowser browser(site);
    Gateway gw(reply_with(MatcherKind::substring, "", "<action>click_url('team')</action>"));
    const auto d = next_action("q", browser.view(), {"'team'", "news"}, gw, browser, "m");
    if (d.action != BrowseAction::go_to_previous_page) return {false, "all-visited override missed"};
  }
  // end() passes through with the whole page.
  {
    ToyBrowser browser(site);
    browser.click_url("team");
    Gateway gw(reply_with(MatcherKind::substring, "ada@example.org", "<action>end()</action>"));
    const auto d = next_action("Ada's email?", "Ada Park\n", {}, gw, browser, "m");
    if (d.action != BrowseAction::end || d.whole_page != "Ada Park\nada@example.org\n") {
      return {false, "end() passthrough lost the page"};
    }
  }
  // res_handler sends exactly the first 20,000 characters.
  for (const std::size_t length : {25000u, 20001u, 20000u}) {
    const std::string prompt(length, 'r');
    Gateway gw(reply_with(MatcherKind::exact_prompt, std::string(20000, 'r'), "ok"));
    try {
      if (res_handler(prompt, gw, "m") != "ok") return {false, "res_handler reply lost"};
    } catch (const Error&) {
      return {false, "res_handler sent the wrong prefix for " + std::to_string(length) + " chars"};
    }
  }
  return {true, "3 browsing scenarios, truncation at 20000 characters"};
}

// ---------------------------------------------------------------------------

Outcome determinism() {
  const auto fixture = suites::comparison_fixture();
  Strategy strategy;
  const auto env = scripted_environment(fixture.toc, scripted_pools());
  const auto first = report_to_json(run_benchmark(fixture.suite, strategy, env, 1234, 1)).dump(2);
  const auto second = report_to_json(run_benchmark(fixture.suite, strategy, env, 1234, 1)).dump(2);
  const auto parallel = report_to_json(run_benchmark(fixture.suite, strategy, env, 1234, 4)).dump(2);
  if (first != second) return {false, "two sequential runs differ"};
  if (first != parallel) return {false, "parallel run differs"};
  return {true, std::to_string(first.size()) + " identical bytes"};
}

Outcome end_to_end() {
  const auto fixture = suites::comparison_fixture();
  Strategy toc_strategy;
  Strategy codeact;
  codeact.kind = StrategyKind::codeact;
  auto report = run_benchmark(fixture.suite, toc_strategy, scripted_environment(fixture.toc, scripted_pools()), 7);
  report.append(run_benchmark(fixture.suite, codeact, scripted_environment(fixture.codeact, scripted_pools()), 7));
  const auto aggregates = report.aggregates();
  if (aggregates.size() != 2) return {false, "expected two strategies"};

  auto correct = [&](const std::string& label) {
    int n = 0;
    for (const auto& row : report.rows) n += row.strategy == label && row.correct ? 1 : 0;
    return n;
  };
  const auto& t = aggregates[0];
  const auto& c = aggregates[1];
  std::ostringstream detail;
  detail << t.strategy << " " << correct(t.strategy) << "/12 at " << t.avg_turns << " turns, " << c.strategy << " "
         << correct(c.strategy) << "/12 at " << c.avg_turns << " turns";
  return {correct(t.strategy) == 10 && correct(c.strategy) == 6 && c.avg_turns > t.avg_turns, detail.str()};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const std::string& name, const std::function<Outcome()>& check) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s  %s (%s)\n", outcome.pass ? "PASS" : "FAIL", name.c_str(), outcome.detail.c_str());
    std::fflush(stdout);
    failures += outcome.pass ? 0 : 1;
  };

  RandomTreeResults trees;
  report("tree shape", [&] {
    trees = random_trees(1000);
    return tree_shape(trees);
  });
  report("stop rule", stop_rule);
  report("turn accounting", turn_accounting);
  report("one call per node", [&] { return one_call_per_node(trees); });
  report("majority vote", vote_oracle);
  report("tagged-output parser", parser_suite);
  report("helper tools", helper_fixtures);
  report("determinism", determinism);
  report("end-to-end comparison", end_to_end);
  return failures == 0 ? 0 : 1;
}
