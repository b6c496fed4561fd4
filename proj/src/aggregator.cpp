#include "toc/aggregator.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "toc/error.hpp"
#include "toc/text.hpp"

namespace toc {

namespace {

// Accepts "-1,234.50", "42", "42.0", "+3."; rejects "1,23" and "abc".
std::optional<std::string> canonical_number(const std::string& s) {
  static const std::regex number(R"(^([+-]?)(\d{1,3}(?:,\d{3})+|\d+)(?:\.(\d*))?$)");
  std::smatch m;
  if (!std::regex_match(s, m, number)) return std::nullopt;

  std::string integer = m[2].str();
  integer.erase(std::remove(integer.begin(), integer.end(), ','), integer.end());
  const auto first_nonzero = integer.find_first_not_of('0');
  integer = first_nonzero == std::string::npos ? "0" : integer.substr(first_nonzero);

  std::string fraction = m[3].str();
  while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();

  std::string out = integer;
  if (!fraction.empty()) out += "." + fraction;
  if (m[1].str() == "-" && out != "0") out = "-" + out;
  return out;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string folded = text::to_lower(text::collapse_whitespace(text));
  if (auto number = canonical_number(folded)) return *number;
  return folded;
}

VoteResult majority_vote(std::span<const NodeRecord> successes) {
  if (successes.empty()) throw Error(ErrorKind::no_successes, "no successful nodes to vote over");

  struct Group {
    int count = 0;
    const NodeRecord* first = nullptr;
    std::vector<const NodeRecord*> members;
  };
  std::map<std::string, Group> groups;
  for (const auto& node : successes) {
    auto& group = groups[normalize_answer(node.outcome.value)];
    ++group.count;
    group.members.push_back(&node);
    if (group.first == nullptr || node_id_less(node, *group.first)) group.first = &node;
  }

  const auto best = std::max_element(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count < b.second.count;
    return node_id_less(*b.second.first, *a.second.first);
  });

  VoteResult result;
  result.winner = best->first;
  auto members = best->second.members;
  std::sort(members.begin(), members.end(), [](const NodeRecord* a, const NodeRecord* b) { return node_id_less(*a, *b); });
  for (const auto* node : members) result.supporters.push_back(node->id);
  for (const auto& [answer, group] : groups) result.tally[answer] = group.count;
  return result;
}

std::string summarize_prompt(std::string_view query, const VoteResult& vote, std::span<const NodeRecord> supporters) {
  std::string prompt = "Give the final answer to the user's query: ";
  prompt += query;
  prompt += "\n\nSeveral independent programs were executed successfully. The most frequent answer, produced by ";
  prompt += std::to_string(vote.supporters.size()) + " of them, is:\n";
  prompt += supporters.empty() ? vote.winner : supporters.front().outcome.value;
  prompt += "\n\nOutputs of the programs that agree:\n";
  for (const auto& node : supporters) prompt += "- [" + node.id + "] " + node.outcome.value + "\n";
  prompt += "\nWrite a concise final answer for the user based on this result.\n";
  return prompt;
}

FinalAnswer finalize(const TreeRecord& tree, const TaskSpec& task, Gateway& gateway) {
  FinalAnswer answer;

  std::vector<NodeRecord> successes;
  for (const auto& id : tree.collected) {
    if (const auto* node = tree.find(id)) successes.push_back(*node);
  }

  if (successes.empty()) {
    std::string best_effort;
    for (const auto* node : tree.layer(tree.layers_used)) {
      for (const auto* field : {&node->outcome.value, &node->outcome.stdout_text, &node->outcome.stderr_text}) {
        if (!text::trim(*field).empty()) {
          best_effort = std::string(text::trim(*field));
          break;
        }
      }
      if (!best_effort.empty()) break;
    }
    answer.text = std::string(kUnresolvedPrefix) + " " + best_effort;
    return answer;
  }

  answer.vote = majority_vote(successes);
  answer.resolved = true;

  std::vector<NodeRecord> supporters;
  for (const auto& id : answer.vote->supporters) supporters.push_back(*tree.find(id));
  const auto& lead = supporters.front();

  const std::string model = tree.config.aggregator_model.value_or(lead.model_id);
  try {
    answer.text = gateway.complete(
        {model, summarize_prompt(task.query, *answer.vote, supporters), tree.config.temperature, RequestTag::summarize});
    answer.summarized = true;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config_error || e.kind() == ErrorKind::protocol_error) throw;
    answer.text = lead.outcome.value;
  }
  return answer;
}

}  // namespace toc
