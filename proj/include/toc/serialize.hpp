#pragma once

// JSON mappings for the domain types (traces, suites, reports).

#include <json.hpp>

#include "toc/core.hpp"
#include "toc/gateway.hpp"

namespace toc {

void to_json(nlohmann::json& j, const ToolDescription& v);
void from_json(const nlohmann::json& j, ToolDescription& v);
void to_json(nlohmann::json& j, const AnswerChecker& v);
void from_json(const nlohmann::json& j, AnswerChecker& v);
void to_json(nlohmann::json& j, const TaskSpec& v);
void from_json(const nlohmann::json& j, TaskSpec& v);
void to_json(nlohmann::json& j, const ExecutionOutcome& v);
void from_json(const nlohmann::json& j, ExecutionOutcome& v);
void to_json(nlohmann::json& j, const NodeRecord& v);
void from_json(const nlohmann::json& j, NodeRecord& v);
void to_json(nlohmann::json& j, const TreeConfig& v);
void from_json(const nlohmann::json& j, TreeConfig& v);
void to_json(nlohmann::json& j, const RunMetrics& v);
void from_json(const nlohmann::json& j, RunMetrics& v);
void to_json(nlohmann::json& j, const TreeRecord& v);
void from_json(const nlohmann::json& j, TreeRecord& v);
void to_json(nlohmann::json& j, const ModelSpec& v);
void from_json(const nlohmann::json& j, ModelSpec& v);

}  // namespace toc
