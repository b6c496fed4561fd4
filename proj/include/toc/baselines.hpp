#pragma once

// Multi-turn comparison strategies. ReAct calls one JSON tool action per
// model turn; CodeAct runs one code block per turn in a namespace that
// persists for the whole run.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "toc/core.hpp"
#include "toc/execution.hpp"
#include "toc/gateway.hpp"
#include "toc/prompt.hpp"

namespace toc {

enum class Termination { answer, gt_match, step_limit, error };

std::string_view to_string(Termination termination);

struct BaselineStep {
  std::string action;
  std::string observation;
};

struct BaselineRun {
  std::vector<BaselineStep> steps;
  std::optional<std::string> final_answer;
  int turns = 0;
  std::int64_t output_words = 0;
  std::int64_t execution_ms = 0;
  Termination terminated_by = Termination::step_limit;
  bool correct = false;
  std::string error;
};

void to_json(nlohmann::json& j, const BaselineRun& run);

inline constexpr int kDefaultMaxSteps = 10;

PromptTemplate react_template();
PromptTemplate codeact_template();

// Renders previous (action, observation) pairs for the next prompt.
std::string render_steps(const std::vector<BaselineStep>& steps);

struct ReactAction {
  enum class Kind { tool, final_answer, invalid } kind = Kind::invalid;
  std::string tool;
  nlohmann::json arguments = nlohmann::json::object();
  std::string answer;
  std::string error;
};

ReactAction parse_react_action(std::string_view reply);

// Python snippet that calls `tool` with keyword arguments and prints the
// result; the arguments travel as a JSON string literal.
std::string tool_call_code(const std::string& tool, const nlohmann::json& arguments);

BaselineRun react_loop(const TaskSpec& task, const ModelSpec& model, Gateway& gateway, CodeExecutor& executor,
                       int max_steps = kDefaultMaxSteps, double temperature = 0.1);

enum class CodeActTermination { answer_tag, gt_match };

BaselineRun codeact_loop(const TaskSpec& task, const ModelSpec& model, Gateway& gateway, CodeExecutor& executor,
                         int max_steps = kDefaultMaxSteps, CodeActTermination termination = CodeActTermination::answer_tag,
                         double temperature = 0.1);

}  // namespace toc
