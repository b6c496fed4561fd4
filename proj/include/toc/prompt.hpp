#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toc/core.hpp"
#include "toc/gateway.hpp"

namespace toc {

enum class Provenance { root, evolved, hand_edited };

std::string_view to_string(Provenance provenance);
Provenance provenance_from_string(std::string_view text);

inline constexpr std::string_view kToolsetPlaceholder = "{toolset_descs}";
inline constexpr std::string_view kHistoryPlaceholder = "{chat_history}";
inline constexpr std::string_view kQueryPlaceholder = "{query}";
inline constexpr std::string_view kTruncationSuffix = "…[truncated]";

struct PromptTemplate {
  std::string id;
  std::string body;
  Provenance provenance = Provenance::hand_edited;

  // Names of placeholders that do not occur exactly once; empty when valid.
  std::vector<std::string> placeholder_problems() const;
  // Throws template_error unless every placeholder occurs exactly once.
  void validate() const;
};

struct PromptPool {
  std::vector<PromptTemplate> templates;

  void validate() const;
};

// The instruction placed ahead of the history for every non-root node.
std::string_view reflection_instruction();
std::string_view evolution_instruction();

PromptTemplate root_template();
// The six-template pool shipped with the engine.
PromptPool default_prompt_pool();

std::string render_toolset(std::span<const ToolDescription> tools);

// Substitutes the three placeholders in one pass; substituted text is never
// rescanned, so tool descriptions or history may contain braces freely.
std::string render_root_prompt(const PromptTemplate& tmpl, const TaskSpec& task, std::string_view history);

// Renders the ancestor chain (root first) as "--- turn j ---" blocks. Each of
// thought, code and outcome is cut to `cap` bytes plus a truncation suffix.
// With `budget` > 0 the oldest blocks are elided until the total fits.
std::string build_history(std::span<const NodeRecord> ancestors, std::size_t cap, std::size_t budget = 0);

std::string render_outcome(const ExecutionOutcome& outcome);

const PromptTemplate& sample_prompt(const PromptPool& pool, std::uint64_t seed, int layer, int index);

struct EvolutionDiscard {
  int ordinal = 0;
  std::string reason;
};

struct EvolutionResult {
  std::vector<PromptTemplate> templates;
  std::vector<EvolutionDiscard> discards;
};

// Requests `count` rewrites of `base`, cycling through `models`. Throws
// evolution_failed when no candidate keeps all three placeholders.
EvolutionResult evolve_prompts(const PromptTemplate& base, int count, Gateway& gateway,
                               const std::vector<ModelSpec>& models, double temperature = 0.1);

// One template per file: a "---" front-matter block with id and provenance,
// then the body verbatim.
PromptTemplate parse_prompt_file(std::string_view contents);
std::string format_prompt_file(const PromptTemplate& tmpl);
PromptPool load_prompt_pool(const std::filesystem::path& dir);
void save_prompt_pool(const PromptPool& pool, const std::filesystem::path& dir);

}  // namespace toc
