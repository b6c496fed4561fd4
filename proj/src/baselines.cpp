#include "toc/baselines.hpp"

#include <algorithm>

#include "toc/error.hpp"
#include "toc/text.hpp"

namespace toc {

using nlohmann::json;

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::answer: return "answer";
    case Termination::gt_match: return "gt_match";
    case Termination::step_limit: return "step_limit";
    case Termination::error: return "error";
  }
  return "error";
}

void to_json(json& j, const BaselineRun& run) {
  json steps = json::array();
  for (const auto& step : run.steps) steps.push_back({{"action", step.action}, {"observation", step.observation}});
  j = {{"steps", std::move(steps)},
       {"final_answer", run.final_answer ? json(*run.final_answer) : json(nullptr)},
       {"turns", run.turns},
       {"output_words", run.output_words},
       {"execution_ms", run.execution_ms},
       {"terminated_by", to_string(run.terminated_by)},
       {"correct", run.correct}};
  if (!run.error.empty()) j["error"] = run.error;
}

PromptTemplate react_template() {
  return {"react",
          "You are a helpful assistant assigned with the task of problem-solving. You solve it by calling the tool "
          "functions below one at a time and reading each result before deciding the next step.\n\n"
          "At each turn, first write your step-by-step thinking inside <thought></thought>. Then write exactly one "
          "action as a JSON object inside <action></action>:\n"
          "  {\"tool\": \"<function name>\", \"arguments\": {\"<parameter>\": <value>}} to call a function, or\n"
          "  {\"final_answer\": \"<answer>\"} once you know the answer.\n\n"
          "You can use the following functions:\n{toolset_descs}\n"
          "Previous actions and observations:\n{chat_history}\n"
          "User's Query:\n{query}\nYour Thought And Action:\n",
          Provenance::hand_edited};
}

PromptTemplate codeact_template() {
  return {"codeact",
          "You are a helpful assistant assigned with the task of problem-solving. You interact with a Python "
          "environment step by step; variables you define stay available in later steps.\n\n"
          "At each turn, first write your thinking inside <thought></thought>. Then either run the next piece of "
          "code inside <execute></execute> and wait for its output, or, when you know the answer, give it inside "
          "<solution></solution>.\n\n"
          "You can use the following functions:\n{toolset_descs}\n"
          "Previous steps and their outputs:\n{chat_history}\n"
          "User's Query:\n{query}\nYour Thought And Next Step:\n",
          Provenance::hand_edited};
}

std::string render_steps(const std::vector<BaselineStep>& steps) {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out += "--- step " + std::to_string(i + 1) + " ---\n";
    out += "Action:\n" + steps[i].action + "\n";
    out += "Observation:\n" + steps[i].observation + "\n";
  }
  return out;
}

namespace {

std::optional<std::string> tagged_span(std::string_view reply, std::string_view open, std::string_view close) {
  const auto begin = reply.find(open);
  if (begin == std::string_view::npos) return std::nullopt;
  const auto content = begin + open.size();
  const auto end = reply.find(close, content);
  if (end == std::string_view::npos) return std::nullopt;
  return std::string(text::trim(reply.substr(content, end - content)));
}

std::string observe(const ExecutionOutcome& outcome) {
  switch (outcome.status) {
    case OutcomeStatus::ok: return outcome.value;
    case OutcomeStatus::empty: return "[no output]";
    case OutcomeStatus::timeout: return "Error: execution timed out";
    case OutcomeStatus::exception:
    case OutcomeStatus::parse_failure:
      return "Error: " + (outcome.stderr_text.empty() ? outcome.stdout_text : outcome.stderr_text);
  }
  return {};
}

void finish(BaselineRun& run, const TaskSpec& task, const Gateway& gateway, std::int64_t words_before) {
  run.output_words = gateway.output_words() - words_before;
  run.correct = run.final_answer.has_value() && check_answer(*run.final_answer, task.checker);
}

}  // namespace

ReactAction parse_react_action(std::string_view reply) {
  ReactAction action;
  const auto body = tagged_span(reply, "<action>", "</action>").value_or(std::string(reply));
  const auto open = body.find('{');
  const auto close = body.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    action.error = "no JSON object found in the action";
    return action;
  }
  json doc;
  try {
    doc = json::parse(body.substr(open, close - open + 1));
  } catch (const json::exception& e) {
    action.error = std::string("action is not valid JSON: ") + e.what();
    return action;
  }
  if (doc.contains("final_answer")) {
    action.kind = ReactAction::Kind::final_answer;
    action.answer = doc["final_answer"].is_string() ? doc["final_answer"].get<std::string>() : doc["final_answer"].dump();
    return action;
  }
  if (doc.contains("tool") && doc["tool"].is_string()) {
    action.kind = ReactAction::Kind::tool;
    action.tool = doc["tool"].get<std::string>();
    if (doc.contains("arguments")) {
      if (!doc["arguments"].is_object()) {
        action.kind = ReactAction::Kind::invalid;
        action.error = "\"arguments\" must be an object";
        return action;
      }
      action.arguments = doc["arguments"];
    }
    return action;
  }
  action.error = "action needs either \"tool\" or \"final_answer\"";
  return action;
}

std::string tool_call_code(const std::string& tool, const json& arguments) {
  return "import json\nprint(" + tool + "(**json.loads(" + json(arguments.dump()).dump() + ")))";
}

BaselineRun react_loop(const TaskSpec& task, const ModelSpec& model, Gateway& gateway, CodeExecutor& executor,
                       int max_steps, double temperature) {
  if (max_steps < 1) throw Error(ErrorKind::config_error, "max_steps must be >= 1");
  const auto words_before = gateway.output_words();
  const auto tmpl = react_template();

  BaselineRun run;
  for (int step = 1; step <= max_steps; ++step) {
    const auto prompt = render_root_prompt(tmpl, task, render_steps(run.steps));
    std::string reply;
    try {
      reply = gateway.complete({model.id, prompt, temperature, RequestTag::node_generation});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::config_error) throw;
      run.turns = step;
      run.terminated_by = Termination::error;
      run.error = e.what();
      finish(run, task, gateway, words_before);
      return run;
    }
    run.turns = step;

    const auto action = parse_react_action(reply);
    const auto action_text = tagged_span(reply, "<action>", "</action>").value_or(std::string(text::trim(reply)));
    if (action.kind == ReactAction::Kind::final_answer) {
      run.steps.push_back({action_text, ""});
      run.final_answer = action.answer;
      run.terminated_by = Termination::answer;
      finish(run, task, gateway, words_before);
      return run;
    }
    if (action.kind == ReactAction::Kind::invalid) {
      run.steps.push_back({action_text, "Invalid action: " + action.error});
      continue;
    }
    const bool known = std::any_of(task.tools.begin(), task.tools.end(),
                                   [&](const ToolDescription& tool) { return tool.name == action.tool; });
    if (!known) {
      run.steps.push_back({action_text, "Error: unknown tool '" + action.tool + "'"});
      continue;
    }
    const auto outcome =
        executor.run({tool_call_code(action.tool, action.arguments), task.tools, false, &gateway, model.id, temperature});
    run.execution_ms += outcome.duration_ms;
    run.steps.push_back({action_text, observe(outcome)});
  }
  run.terminated_by = Termination::step_limit;
  finish(run, task, gateway, words_before);
  return run;
}

BaselineRun codeact_loop(const TaskSpec& task, const ModelSpec& model, Gateway& gateway, CodeExecutor& executor,
                         int max_steps, CodeActTermination termination, double temperature) {
  if (max_steps < 1) throw Error(ErrorKind::config_error, "max_steps must be >= 1");
  const auto words_before = gateway.output_words();
  const auto tmpl = codeact_template();

  BaselineRun run;
  bool session_started = false;
  for (int step = 1; step <= max_steps; ++step) {
    const auto prompt = render_root_prompt(tmpl, task, render_steps(run.steps));
    std::string reply;
    try {
      reply = gateway.complete({model.id, prompt, temperature, RequestTag::node_generation});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::config_error) throw;
      run.turns = step;
      run.terminated_by = Termination::error;
      run.error = e.what();
      finish(run, task, gateway, words_before);
      return run;
    }
    run.turns = step;

    if (termination == CodeActTermination::answer_tag) {
      if (auto solution = tagged_span(reply, "<solution>", "</solution>")) {
        run.steps.push_back({"<solution>" + *solution + "</solution>", ""});
        run.final_answer = *solution;
        run.terminated_by = Termination::answer;
        finish(run, task, gateway, words_before);
        return run;
      }
    }

    const auto code = tagged_span(reply, "<execute>", "</execute>");
    if (!code || code->empty()) {
      run.steps.push_back({std::string(text::trim(reply)), "No <execute> block found in the reply."});
      continue;
    }
    // The first executed step opens a fresh session; later steps reuse it.
    const auto outcome = executor.run({*code, task.tools, session_started, &gateway, model.id, temperature});
    session_started = true;
    run.execution_ms += outcome.duration_ms;
    run.steps.push_back({*code, observe(outcome)});

    if (termination == CodeActTermination::gt_match && outcome.status == OutcomeStatus::ok &&
        check_answer(outcome.value, task.checker)) {
      run.final_answer = outcome.value;
      run.terminated_by = Termination::gt_match;
      finish(run, task, gateway, words_before);
      return run;
    }
  }
  run.terminated_by = Termination::step_limit;
  finish(run, task, gateway, words_before);
  return run;
}

}  // namespace toc
