#pragma once

// One tree node end to end: render the prompt, make a single completion call,
// and split the reply into its <thought> plan and <execute> program.

#include <span>
#include <string>
#include <string_view>

#include "toc/core.hpp"
#include "toc/gateway.hpp"
#include "toc/prompt.hpp"

namespace toc {

struct DraftNode {
  std::string thought;
  std::string code;
  std::string raw_output;
  bool parse_ok = false;
};

// Never throws. The first <thought> span wins, and the <execute> span is the
// first one outside it; both must be closed and non-empty for parse_ok.
DraftNode parse_tagged(std::string_view raw);

// Canonical rendering that parse_tagged inverts.
std::string format_tagged(std::string_view thought, std::string_view code);

// The chat history for a node: empty at the root, otherwise the reflection
// instruction followed by the ancestor blocks.
std::string node_history(std::span<const NodeRecord> ancestors, const TreeConfig& config);

std::string build_node_prompt(const TaskSpec& task, std::span<const NodeRecord> ancestors,
                              const PromptTemplate& tmpl, const TreeConfig& config);

// Exactly one node_generation call. Gateway failures become a DraftNode with
// parse_ok=false whose raw_output carries the error note.
DraftNode generate_node(const TaskSpec& task, std::span<const NodeRecord> ancestors, const PromptTemplate& tmpl,
                        const ModelSpec& model, Gateway& gateway, const TreeConfig& config = {});

inline constexpr std::string_view kGenerationFailedNote = "[node_generation_failed] ";

}  // namespace toc
