#include "toc/codeprogram.hpp"

#include <optional>

#include "toc/error.hpp"
#include "toc/text.hpp"

namespace toc {

namespace {

constexpr std::string_view kThoughtOpen = "<thought>";
constexpr std::string_view kThoughtClose = "</thought>";
constexpr std::string_view kExecuteOpen = "<execute>";
constexpr std::string_view kExecuteClose = "</execute>";

struct Span {
  std::size_t begin;        // position of the opening tag
  std::size_t end;          // one past the closing tag
  std::string_view content;
};

std::optional<Span> find_span(std::string_view raw, std::string_view open, std::string_view close,
                              std::size_t open_pos) {
  if (open_pos == std::string_view::npos) return std::nullopt;
  const auto content_begin = open_pos + open.size();
  const auto close_pos = raw.find(close, content_begin);
  if (close_pos == std::string_view::npos) return std::nullopt;
  return Span{open_pos, close_pos + close.size(), raw.substr(content_begin, close_pos - content_begin)};
}

}  // namespace

DraftNode parse_tagged(std::string_view raw) {
  DraftNode draft;
  draft.raw_output = std::string(raw);

  const auto thought = find_span(raw, kThoughtOpen, kThoughtClose, raw.find(kThoughtOpen));
  if (!thought) return draft;

  auto execute_open = raw.find(kExecuteOpen);
  if (execute_open != std::string_view::npos && execute_open >= thought->begin && execute_open < thought->end) {
    execute_open = raw.find(kExecuteOpen, thought->end);
  }
  const auto execute = find_span(raw, kExecuteOpen, kExecuteClose, execute_open);
  if (!execute) return draft;
  if (execute->begin < thought->begin && execute->end > thought->begin) return draft;

  draft.thought = std::string(text::trim(thought->content));
  draft.code = std::string(text::trim(execute->content));
  draft.parse_ok = !draft.thought.empty() && !draft.code.empty();
  return draft;
}

std::string format_tagged(std::string_view thought, std::string_view code) {
  std::string out;
  out.reserve(thought.size() + code.size() + 40);
  out.append(kThoughtOpen).append(thought).append(kThoughtClose).append("\n");
  out.append(kExecuteOpen).append("\n").append(code).append("\n").append(kExecuteClose);
  return out;
}

std::string node_history(std::span<const NodeRecord> ancestors, const TreeConfig& config) {
  if (ancestors.empty()) return {};
  return std::string(reflection_instruction()) + "\n\n" +
         build_history(ancestors, config.history_char_cap, config.history_budget);
}

std::string build_node_prompt(const TaskSpec& task, std::span<const NodeRecord> ancestors,
                              const PromptTemplate& tmpl, const TreeConfig& config) {
  return render_root_prompt(tmpl, task, node_history(ancestors, config));
}

DraftNode generate_node(const TaskSpec& task, std::span<const NodeRecord> ancestors, const PromptTemplate& tmpl,
                        const ModelSpec& model, Gateway& gateway, const TreeConfig& config) {
  const auto prompt = build_node_prompt(task, ancestors, tmpl, config);
  try {
    return parse_tagged(gateway.complete({model.id, prompt, config.temperature, RequestTag::node_generation}));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::protocol_error || e.kind() == ErrorKind::config_error) throw;
    DraftNode failed;
    failed.raw_output = std::string(kGenerationFailedNote) + e.what();
    return failed;
  }
}

}  // namespace toc
