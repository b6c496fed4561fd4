#pragma once

// Breadth-first growth of a Tree-of-Code. Layer 1 holds M independent
// programs; each later layer holds at most M children, spread round-robin
// over the failing nodes of the layer above. Successful nodes stop and are
// collected. Growth decisions see only success/failure bits.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "toc/core.hpp"
#include "toc/execution.hpp"
#include "toc/gateway.hpp"
#include "toc/prompt.hpp"

namespace toc {

struct LayerAssignment {
  int index = 1;
  std::optional<std::string> parent_id;  // empty for layer 1

  friend bool operator==(const LayerAssignment&, const LayerAssignment&) = default;
};

struct LayerPlan {
  int layer = 1;
  std::vector<LayerAssignment> assignments;
};

using NodeStatusEntry = std::pair<std::string, NodeStatus>;

LayerPlan root_plan(int width);

// nullopt means stop: no failing node is left to grow from.
std::optional<LayerPlan> plan_next_layer(std::span<const NodeStatusEntry> prev_layer, int width, int layer);

struct Pools {
  PromptPool prompts;
  std::vector<ModelSpec> models;
};

// Ancestors of `parent_id`, root first, ending with the parent itself.
std::vector<NodeRecord> ancestor_chain(const TreeRecord& tree, const std::optional<std::string>& parent_id);

// Generates and executes every node of `plan`. Generation is one batched
// gateway call per node; execution fans out over the executor pool. Nodes
// are appended to `tree` in index order.
std::vector<NodeRecord> run_layer(const LayerPlan& plan, const TaskSpec& task, TreeRecord& tree, const Pools& pools,
                                  ExecutorPool& executor, Gateway& gateway, std::uint64_t seed);

TreeRecord grow_tree(const TaskSpec& task, const TreeConfig& config, const Pools& pools, ExecutorPool& executor,
                     Gateway& gateway, std::uint64_t seed);

}  // namespace toc
