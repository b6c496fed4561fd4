#include "toc/serialize.hpp"

namespace toc {

using nlohmann::json;

void to_json(json& j, const ToolDescription& v) {
  j = {{"name", v.name}, {"description", v.description}, {"fn_signature", v.fn_signature}};
  if (v.output_example) j["output_example"] = *v.output_example;
}

void from_json(const json& j, ToolDescription& v) {
  v.name = j.at("name").get<std::string>();
  v.description = j.value("description", std::string{});
  v.fn_signature = j.at("fn_signature").get<std::string>();
  if (j.contains("output_example") && !j.at("output_example").is_null()) {
    v.output_example = j.at("output_example").get<std::string>();
  } else {
    v.output_example.reset();
  }
}

void to_json(json& j, const AnswerChecker& v) { j = {{"mode", to_string(v.mode)}, {"terms", v.terms}}; }

void from_json(const json& j, AnswerChecker& v) {
  v.mode = check_mode_from_string(j.at("mode").get<std::string>());
  v.terms = j.at("terms").get<std::vector<std::string>>();
}

void to_json(json& j, const TaskSpec& v) {
  j = {{"id", v.id}, {"category", v.category}, {"query", v.query}, {"tools", v.tools}, {"checker", v.checker}};
}

void from_json(const json& j, TaskSpec& v) {
  v.id = j.at("id").get<std::string>();
  v.category = j.value("category", std::string{});
  v.query = j.at("query").get<std::string>();
  v.tools = j.at("tools").get<std::vector<ToolDescription>>();
  v.checker = j.at("checker").get<AnswerChecker>();
}

void to_json(json& j, const ExecutionOutcome& v) {
  j = {{"status", to_string(v.status)},
       {"value", v.value},
       {"stdout", v.stdout_text},
       {"stderr", v.stderr_text},
       {"duration_ms", v.duration_ms}};
}

void from_json(const json& j, ExecutionOutcome& v) {
  v.status = outcome_status_from_string(j.at("status").get<std::string>());
  v.value = j.value("value", std::string{});
  v.stdout_text = j.value("stdout", std::string{});
  v.stderr_text = j.value("stderr", std::string{});
  v.duration_ms = j.value("duration_ms", std::int64_t{0});
}

void to_json(json& j, const NodeRecord& v) {
  j = {{"id", v.id},
       {"layer", v.layer},
       {"index", v.index},
       {"parent_id", v.parent_id ? json(*v.parent_id) : json(nullptr)},
       {"prompt_id", v.prompt_id},
       {"model_id", v.model_id},
       {"status", to_string(v.status)},
       {"thought", v.thought},
       {"code", v.code},
       {"outcome", v.outcome},
       {"prompt", v.prompt},
       {"raw_output", v.raw_output}};
}

void from_json(const json& j, NodeRecord& v) {
  v.id = j.at("id").get<std::string>();
  v.layer = j.at("layer").get<int>();
  v.index = j.at("index").get<int>();
  if (j.contains("parent_id") && !j.at("parent_id").is_null()) {
    v.parent_id = j.at("parent_id").get<std::string>();
  } else {
    v.parent_id.reset();
  }
  v.prompt_id = j.value("prompt_id", std::string{});
  v.model_id = j.value("model_id", std::string{});
  v.status = node_status_from_string(j.at("status").get<std::string>());
  v.thought = j.value("thought", std::string{});
  v.code = j.value("code", std::string{});
  v.outcome = j.at("outcome").get<ExecutionOutcome>();
  v.prompt = j.value("prompt", std::string{});
  v.raw_output = j.value("raw_output", std::string{});
}

void to_json(json& j, const TreeConfig& v) {
  j = {{"depth", v.depth},
       {"width", v.width},
       {"timeout_ms", v.timeout_ms},
       {"history_char_cap", v.history_char_cap},
       {"history_budget", v.history_budget},
       {"temperature", v.temperature},
       {"aggregator_model", v.aggregator_model ? json(*v.aggregator_model) : json(nullptr)}};
}

void from_json(const json& j, TreeConfig& v) {
  TreeConfig defaults;
  v.depth = j.value("depth", defaults.depth);
  v.width = j.value("width", defaults.width);
  v.timeout_ms = j.value("timeout_ms", defaults.timeout_ms);
  v.history_char_cap = j.value("history_char_cap", defaults.history_char_cap);
  v.history_budget = j.value("history_budget", defaults.history_budget);
  v.temperature = j.value("temperature", defaults.temperature);
  if (j.contains("aggregator_model") && !j.at("aggregator_model").is_null()) {
    v.aggregator_model = j.at("aggregator_model").get<std::string>();
  } else {
    v.aggregator_model.reset();
  }
}

void to_json(json& j, const RunMetrics& v) {
  j = {{"correct", v.correct}, {"turns", v.turns}, {"output_words", v.output_words}};
}

void from_json(const json& j, RunMetrics& v) {
  v.correct = j.at("correct").get<bool>();
  v.turns = j.at("turns").get<int>();
  v.output_words = j.at("output_words").get<std::int64_t>();
}

void to_json(json& j, const TreeRecord& v) {
  j = {{"task_id", v.task_id},
       {"seed", v.seed},
       {"config", v.config},
       {"layers_used", v.layers_used},
       {"nodes", v.nodes},
       {"collected", v.collected},
       {"final_answer", v.final_answer ? json(*v.final_answer) : json(nullptr)},
       {"metrics", v.metrics}};
}

void from_json(const json& j, TreeRecord& v) {
  v.task_id = j.at("task_id").get<std::string>();
  v.seed = j.at("seed").get<std::uint64_t>();
  v.config = j.at("config").get<TreeConfig>();
  v.layers_used = j.at("layers_used").get<int>();
  v.nodes = j.at("nodes").get<std::vector<NodeRecord>>();
  v.collected = j.at("collected").get<std::vector<std::string>>();
  if (!j.at("final_answer").is_null()) {
    v.final_answer = j.at("final_answer").get<std::string>();
  } else {
    v.final_answer.reset();
  }
  v.metrics = j.at("metrics").get<RunMetrics>();
}

void to_json(json& j, const ModelSpec& v) {
  j = {{"id", v.id},
       {"endpoint", v.endpoint},
       {"auth_env_var", v.auth_env_var},
       {"temperature", v.temperature},
       {"max_output_tokens", v.max_output_tokens}};
}

void from_json(const json& j, ModelSpec& v) {
  v.id = j.at("id").get<std::string>();
  v.endpoint = j.value("endpoint", std::string{});
  v.auth_env_var = j.value("auth_env_var", std::string{});
  v.temperature = j.value("temperature", 0.1);
  v.max_output_tokens = j.value("max_output_tokens", 2048);
}

}  // namespace toc
