#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toc/core.hpp"
#include "toc/gateway.hpp"

namespace toc {

// Trim, collapse whitespace, case-fold; numbers lose thousands separators
// and trailing fractional zeros ("1,000.50" -> "1000.5", "42.0" -> "42").
std::string normalize_answer(std::string_view text);

struct VoteResult {
  std::string winner;
  std::vector<std::string> supporters;
  std::map<std::string, int> tally;
};

// Groups successes by normalized value. Ties go to the group holding the
// smallest node id. Throws no_successes on empty input.
VoteResult majority_vote(std::span<const NodeRecord> successes);

inline constexpr std::string_view kUnresolvedPrefix = "UNRESOLVED:";

struct FinalAnswer {
  std::string text;
  std::optional<VoteResult> vote;
  bool resolved = false;
  bool summarized = false;
};

std::string summarize_prompt(std::string_view query, const VoteResult& vote, std::span<const NodeRecord> supporters);

// At most one summarize call. With no successes the answer is
// "UNRESOLVED: " plus the last layer's best-effort output.
FinalAnswer finalize(const TreeRecord& tree, const TaskSpec& task, Gateway& gateway);

}  // namespace toc
