#include "toc/tree.hpp"

#include <algorithm>
#include <charconv>
#include <tuple>

#include "toc/aggregator.hpp"
#include "toc/codeprogram.hpp"
#include "toc/error.hpp"

namespace toc {

namespace {

std::tuple<int, int, std::string_view> id_key(std::string_view id) {
  const auto dash = id.find('-');
  int layer = 0;
  int index = 0;
  if (dash != std::string_view::npos) {
    const auto l = std::from_chars(id.data(), id.data() + dash, layer);
    const auto m = std::from_chars(id.data() + dash + 1, id.data() + id.size(), index);
    if (l.ec == std::errc{} && m.ec == std::errc{}) return {layer, index, {}};
  }
  return {0, 0, id};
}

ExecutionOutcome parse_failure_outcome(const DraftNode& draft) {
  ExecutionOutcome outcome;
  outcome.status = OutcomeStatus::parse_failure;
  if (draft.raw_output.rfind(kGenerationFailedNote, 0) == 0) {
    outcome.stderr_text = draft.raw_output;
  } else {
    outcome.stderr_text =
        "Could not find a non-empty <thought>...</thought> followed by an <execute>...</execute> block in the reply.";
  }
  return outcome;
}

}  // namespace

LayerPlan root_plan(int width) {
  LayerPlan plan;
  plan.layer = 1;
  for (int m = 1; m <= width; ++m) plan.assignments.push_back({m, std::nullopt});
  return plan;
}

std::optional<LayerPlan> plan_next_layer(std::span<const NodeStatusEntry> prev_layer, int width, int layer) {
  std::vector<std::string> failing;
  for (const auto& [id, status] : prev_layer) {
    if (status == NodeStatus::failure) failing.push_back(id);
  }
  if (failing.empty() || width < 1) return std::nullopt;
  std::sort(failing.begin(), failing.end(),
            [](const std::string& a, const std::string& b) { return id_key(a) < id_key(b); });

  LayerPlan plan;
  plan.layer = layer;
  for (int m = 1; m <= width; ++m) {
    plan.assignments.push_back({m, failing[static_cast<std::size_t>(m - 1) % failing.size()]});
  }
  return plan;
}

std::vector<NodeRecord> ancestor_chain(const TreeRecord& tree, const std::optional<std::string>& parent_id) {
  std::vector<NodeRecord> chain;
  for (auto id = parent_id; id;) {
    const auto* node = tree.find(*id);
    if (node == nullptr) throw Error(ErrorKind::config_error, "unknown parent node '" + *id + "'");
    chain.push_back(*node);
    id = node->parent_id;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::vector<NodeRecord> run_layer(const LayerPlan& plan, const TaskSpec& task, TreeRecord& tree, const Pools& pools,
                                  ExecutorPool& executor, Gateway& gateway, std::uint64_t seed) {
  if (plan.assignments.empty()) throw Error(ErrorKind::config_error, "empty layer plan");

  std::vector<NodeRecord> nodes;
  std::vector<CompletionRequest> requests;
  for (const auto& assignment : plan.assignments) {
    const auto& tmpl = sample_prompt(pools.prompts, seed, plan.layer, assignment.index);
    const auto& model = sample_model(pools.models, seed, plan.layer, assignment.index);
    const auto ancestors = ancestor_chain(tree, assignment.parent_id);

    NodeRecord node;
    node.id = make_node_id(plan.layer, assignment.index);
    node.layer = plan.layer;
    node.index = assignment.index;
    node.parent_id = assignment.parent_id;
    node.prompt_id = tmpl.id;
    node.model_id = model.id;
    node.prompt = build_node_prompt(task, ancestors, tmpl, tree.config);
    requests.push_back({model.id, node.prompt, tree.config.temperature, RequestTag::node_generation});
    nodes.push_back(std::move(node));
  }

  const auto replies = gateway.complete_batch(requests);

  std::vector<ExecCall> calls;
  std::vector<std::size_t> executed;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto& node = nodes[i];
    const auto draft = replies[i].text ? parse_tagged(*replies[i].text)
                                       : DraftNode{{}, {}, std::string(kGenerationFailedNote) + replies[i].error, false};
    node.raw_output = draft.raw_output;
    node.thought = draft.thought;
    node.code = draft.code;
    if (!draft.parse_ok) {
      node.outcome = parse_failure_outcome(draft);
      continue;
    }
    calls.push_back({node.code, task.tools, false, &gateway, node.model_id, tree.config.temperature});
    executed.push_back(i);
  }

  const auto outcomes = executor.run_all(calls);
  for (std::size_t k = 0; k < executed.size(); ++k) nodes[executed[k]].outcome = outcomes[k];

  for (auto& node : nodes) {
    node.status = classify_outcome(node.outcome);
    tree.nodes.push_back(node);
  }
  return nodes;
}

TreeRecord grow_tree(const TaskSpec& task, const TreeConfig& config, const Pools& pools, ExecutorPool& executor,
                     Gateway& gateway, std::uint64_t seed) {
  config.validate();
  pools.prompts.validate();
  if (pools.models.empty()) throw Error(ErrorKind::config_error, "model pool is empty");

  const auto words_before = gateway.output_words();

  TreeRecord tree;
  tree.task_id = task.id;
  tree.config = config;
  tree.seed = seed;

  std::optional<LayerPlan> plan = root_plan(config.width);
  while (plan) {
    const auto nodes = run_layer(*plan, task, tree, pools, executor, gateway, seed);
    tree.layers_used = plan->layer;
    if (plan->layer >= config.depth) break;

    std::vector<NodeStatusEntry> statuses;
    for (const auto& node : nodes) statuses.emplace_back(node.id, node.status);
    plan = plan_next_layer(statuses, config.width, plan->layer + 1);
  }

  for (const auto& node : tree.nodes) {
    if (node.status == NodeStatus::success) tree.collected.push_back(node.id);
  }

  const auto answer = finalize(tree, task, gateway);
  tree.final_answer = answer.text;
  tree.metrics.turns = tree.layers_used;
  tree.metrics.correct = answer.resolved && check_answer(answer.text, task.checker);
  tree.metrics.output_words = gateway.output_words() - words_before;
  return tree;
}

}  // namespace toc
