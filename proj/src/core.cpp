#include "toc/core.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>

#include "toc/aggregator.hpp"
#include "toc/error.hpp"
#include "toc/text.hpp"

namespace toc {

std::string_view to_string(CheckMode mode) {
  switch (mode) {
    case CheckMode::keywords_all: return "keywords_all";
    case CheckMode::keywords_any: return "keywords_any";
    case CheckMode::exact_normalized: return "exact_normalized";
  }
  return "keywords_all";
}

CheckMode check_mode_from_string(std::string_view text) {
  if (text == "keywords_all") return CheckMode::keywords_all;
  if (text == "keywords_any") return CheckMode::keywords_any;
  if (text == "exact_normalized") return CheckMode::exact_normalized;
  throw Error(ErrorKind::config_error, "unknown checker mode '" + std::string(text) + "'");
}

void AnswerChecker::validate() const {
  if (terms.empty()) throw Error(ErrorKind::config_error, "checker has no terms");
  if (mode == CheckMode::exact_normalized && terms.size() != 1) {
    throw Error(ErrorKind::config_error, "exact_normalized checker needs exactly one term");
  }
}

void TaskSpec::validate() const {
  if (id.empty()) throw Error(ErrorKind::config_error, "task id is empty");
  if (text::trim(query).empty()) throw Error(ErrorKind::config_error, "task '" + id + "' has an empty query");
  if (tools.empty()) throw Error(ErrorKind::config_error, "task '" + id + "' has no tools");
  std::set<std::string> names;
  for (const auto& tool : tools) {
    if (tool.fn_signature.empty()) {
      throw Error(ErrorKind::config_error, "tool '" + tool.name + "' has no fn_signature");
    }
    if (!names.insert(tool.name).second) {
      throw Error(ErrorKind::config_error, "duplicate tool '" + tool.name + "' in task '" + id + "'");
    }
  }
  checker.validate();
}

std::string_view to_string(OutcomeStatus status) {
  switch (status) {
    case OutcomeStatus::ok: return "ok";
    case OutcomeStatus::exception: return "exception";
    case OutcomeStatus::timeout: return "timeout";
    case OutcomeStatus::empty: return "empty";
    case OutcomeStatus::parse_failure: return "parse_failure";
  }
  return "exception";
}

OutcomeStatus outcome_status_from_string(std::string_view text) {
  if (text == "ok") return OutcomeStatus::ok;
  if (text == "exception") return OutcomeStatus::exception;
  if (text == "timeout") return OutcomeStatus::timeout;
  if (text == "empty") return OutcomeStatus::empty;
  if (text == "parse_failure") return OutcomeStatus::parse_failure;
  throw Error(ErrorKind::config_error, "unknown outcome status '" + std::string(text) + "'");
}

std::string_view to_string(NodeStatus status) {
  return status == NodeStatus::success ? "success" : "failure";
}

NodeStatus node_status_from_string(std::string_view text) {
  if (text == "success") return NodeStatus::success;
  if (text == "failure") return NodeStatus::failure;
  throw Error(ErrorKind::config_error, "unknown node status '" + std::string(text) + "'");
}

std::string make_node_id(int layer, int index) {
  return std::to_string(layer) + "-" + std::to_string(index);
}

bool node_id_less(const NodeRecord& a, const NodeRecord& b) {
  return std::tie(a.layer, a.index) < std::tie(b.layer, b.index);
}

void TreeConfig::validate() const {
  if (depth < 1) throw Error(ErrorKind::config_error, "depth L must be >= 1");
  if (width < 1) throw Error(ErrorKind::config_error, "width M must be >= 1");
  if (timeout_ms <= 0) throw Error(ErrorKind::config_error, "timeout_ms must be > 0");
  if (temperature < 0) throw Error(ErrorKind::config_error, "temperature must be >= 0");
}

std::vector<const NodeRecord*> TreeRecord::layer(int l) const {
  std::vector<const NodeRecord*> out;
  for (const auto& node : nodes) {
    if (node.layer == l) out.push_back(&node);
  }
  return out;
}

const NodeRecord* TreeRecord::find(std::string_view id) const {
  for (const auto& node : nodes) {
    if (node.id == id) return &node;
  }
  return nullptr;
}

std::int64_t count_output_words(std::string_view text) {
  std::int64_t words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

bool check_answer(std::string_view response, const AnswerChecker& checker) {
  switch (checker.mode) {
    case CheckMode::keywords_all:
      return std::all_of(checker.terms.begin(), checker.terms.end(), [&](const std::string& term) {
        return text::contains_case_insensitive(response, term);
      });
    case CheckMode::keywords_any:
      return std::any_of(checker.terms.begin(), checker.terms.end(), [&](const std::string& term) {
        return text::contains_case_insensitive(response, term);
      });
    case CheckMode::exact_normalized:
      return !checker.terms.empty() && normalize_answer(response) == normalize_answer(checker.terms.front());
  }
  return false;
}

}  // namespace toc
