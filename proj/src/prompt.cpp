#include "toc/prompt.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "toc/error.hpp"
#include "toc/sampling.hpp"
#include "toc/text.hpp"

namespace toc {

namespace fs = std::filesystem;

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::root: return "root";
    case Provenance::evolved: return "evolved";
    case Provenance::hand_edited: return "hand_edited";
  }
  return "hand_edited";
}

Provenance provenance_from_string(std::string_view text) {
  if (text == "root") return Provenance::root;
  if (text == "evolved") return Provenance::evolved;
  if (text == "hand_edited") return Provenance::hand_edited;
  throw Error(ErrorKind::template_error, "unknown provenance '" + std::string(text) + "'");
}

namespace {

constexpr std::array<std::string_view, 3> kPlaceholders = {kToolsetPlaceholder, kHistoryPlaceholder,
                                                           kQueryPlaceholder};

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

std::string cap_field(std::string_view field, std::size_t cap) {
  if (field.size() <= cap) return std::string(field);
  std::string out(text::utf8_prefix_bytes(field, cap));
  out += kTruncationSuffix;
  return out;
}

std::string turn_header(std::size_t turn) { return "--- turn " + std::to_string(turn) + " ---\n"; }

}  // namespace

std::vector<std::string> PromptTemplate::placeholder_problems() const {
  std::vector<std::string> problems;
  for (auto placeholder : kPlaceholders) {
    const auto n = count_occurrences(body, placeholder);
    if (n != 1) problems.push_back(std::string(placeholder) + (n == 0 ? " missing" : " repeated"));
  }
  return problems;
}

void PromptTemplate::validate() const {
  const auto problems = placeholder_problems();
  if (problems.empty()) return;
  std::string message = "template '" + id + "':";
  for (const auto& problem : problems) message += " " + problem;
  throw Error(ErrorKind::template_error, message);
}

void PromptPool::validate() const {
  if (templates.empty()) throw Error(ErrorKind::template_error, "prompt pool is empty");
  std::set<std::string> ids;
  for (const auto& tmpl : templates) {
    tmpl.validate();
    if (!ids.insert(tmpl.id).second) throw Error(ErrorKind::template_error, "duplicate template id '" + tmpl.id + "'");
  }
}

std::string render_toolset(std::span<const ToolDescription> tools) {
  std::string out;
  for (const auto& tool : tools) {
    out += "- " + tool.name + ": " + tool.description + "\n";
    out += "  fn_signature: " + tool.fn_signature + "\n";
    if (tool.output_example) out += "  output_example: " + *tool.output_example + "\n";
  }
  return out;
}

std::string render_root_prompt(const PromptTemplate& tmpl, const TaskSpec& task, std::string_view history) {
  tmpl.validate();
  const std::string toolset = render_toolset(task.tools);

  struct Slot {
    std::size_t pos;
    std::string_view placeholder;
    std::string_view value;
  };
  std::array<Slot, 3> slots = {{
      {tmpl.body.find(kToolsetPlaceholder), kToolsetPlaceholder, toolset},
      {tmpl.body.find(kHistoryPlaceholder), kHistoryPlaceholder, history},
      {tmpl.body.find(kQueryPlaceholder), kQueryPlaceholder, task.query},
  }};
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) { return a.pos < b.pos; });

  std::string out;
  out.reserve(tmpl.body.size() + toolset.size() + history.size() + task.query.size());
  std::size_t cursor = 0;
  for (const auto& slot : slots) {
    out.append(tmpl.body, cursor, slot.pos - cursor);
    out.append(slot.value);
    cursor = slot.pos + slot.placeholder.size();
  }
  out.append(tmpl.body, cursor, std::string::npos);
  return out;
}

std::string render_outcome(const ExecutionOutcome& outcome) {
  switch (outcome.status) {
    case OutcomeStatus::ok:
      return outcome.value;
    case OutcomeStatus::empty:
      return outcome.stdout_text.empty() ? "None (the program printed nothing)" : outcome.stdout_text;
    case OutcomeStatus::timeout:
      return outcome.stderr_text.empty()
                 ? "execution timed out after " + std::to_string(outcome.duration_ms) + " ms"
                 : outcome.stderr_text;
    case OutcomeStatus::exception:
    case OutcomeStatus::parse_failure:
      return outcome.stderr_text.empty() ? outcome.stdout_text : outcome.stderr_text;
  }
  return {};
}

std::string build_history(std::span<const NodeRecord> ancestors, std::size_t cap, std::size_t budget) {
  std::vector<std::string> blocks;
  blocks.reserve(ancestors.size());
  for (std::size_t j = 0; j < ancestors.size(); ++j) {
    const auto& node = ancestors[j];
    std::string block = turn_header(j + 1);
    block += "Thought:\n" + cap_field(node.thought, cap) + "\n";
    block += "Code:\n" + cap_field(node.code, cap) + "\n";
    block += "Execution result (" + std::string(to_string(node.outcome.status)) + "):\n";
    block += cap_field(render_outcome(node.outcome), cap) + "\n";
    blocks.push_back(std::move(block));
  }

  auto total = [&] {
    std::size_t n = 0;
    for (const auto& block : blocks) n += block.size();
    return n;
  };
  if (budget > 0) {
    // Oldest turns go first; the most recent turn is always kept whole.
    for (std::size_t j = 0; j + 1 < blocks.size() && total() > budget; ++j) {
      blocks[j] = turn_header(j + 1) + std::string(kTruncationSuffix) + "\n";
    }
  }

  std::string out;
  for (const auto& block : blocks) out += block;
  return out;
}

const PromptTemplate& sample_prompt(const PromptPool& pool, std::uint64_t seed, int layer, int index) {
  if (pool.templates.empty()) throw Error(ErrorKind::template_error, "prompt pool is empty");
  const auto key = sampling::node_key(seed, sampling::Stream::prompt, layer, index);
  return pool.templates[sampling::uniform_index(key, pool.templates.size())];
}

EvolutionResult evolve_prompts(const PromptTemplate& base, int count, Gateway& gateway,
                               const std::vector<ModelSpec>& models, double temperature) {
  if (count < 1) throw Error(ErrorKind::config_error, "evolution count must be >= 1");
  if (models.empty()) throw Error(ErrorKind::config_error, "evolution needs at least one model");

  const std::string prompt = std::string(evolution_instruction()) + "\n\n" + base.body;
  EvolutionResult result;
  for (int k = 1; k <= count; ++k) {
    const auto& model = models[static_cast<std::size_t>(k - 1) % models.size()];
    std::string response;
    try {
      response = gateway.complete({model.id, prompt, temperature, RequestTag::prompt_evolution});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::config_error) throw;
      result.discards.push_back({k, e.what()});
      continue;
    }
    PromptTemplate candidate{base.id + "-evo" + std::to_string(k), std::move(response), Provenance::evolved};
    const auto problems = candidate.placeholder_problems();
    if (!problems.empty()) {
      std::string reason;
      for (const auto& problem : problems) reason += (reason.empty() ? "" : ", ") + problem;
      result.discards.push_back({k, reason});
      continue;
    }
    result.templates.push_back(std::move(candidate));
  }
  if (result.templates.empty()) {
    throw Error(ErrorKind::evolution_failed,
                "none of " + std::to_string(count) + " evolved prompts kept all placeholders");
  }
  return result;
}

PromptTemplate parse_prompt_file(std::string_view contents) {
  constexpr std::string_view fence = "---\n";
  if (contents.substr(0, fence.size()) != fence) {
    throw Error(ErrorKind::template_error, "prompt file must start with a '---' front-matter line");
  }
  const auto close = contents.find("\n---\n", fence.size() - 1);
  if (close == std::string_view::npos) throw Error(ErrorKind::template_error, "unterminated front matter");

  PromptTemplate tmpl;
  bool has_id = false;
  std::istringstream header(std::string(contents.substr(fence.size(), close + 1 - fence.size())));
  for (std::string line; std::getline(header, line);) {
    if (text::trim(line).empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw Error(ErrorKind::template_error, "bad front-matter line '" + line + "'");
    const auto key = text::trim(std::string_view(line).substr(0, colon));
    const auto value = std::string(text::trim(std::string_view(line).substr(colon + 1)));
    if (key == "id") {
      tmpl.id = value;
      has_id = !value.empty();
    } else if (key == "provenance") {
      tmpl.provenance = provenance_from_string(value);
    } else {
      throw Error(ErrorKind::template_error, "unknown front-matter key '" + std::string(key) + "'");
    }
  }
  if (!has_id) throw Error(ErrorKind::template_error, "front matter has no id");
  tmpl.body = std::string(contents.substr(close + 5));
  tmpl.validate();
  return tmpl;
}

std::string format_prompt_file(const PromptTemplate& tmpl) {
  return "---\nid: " + tmpl.id + "\nprovenance: " + std::string(to_string(tmpl.provenance)) + "\n---\n" + tmpl.body;
}

PromptPool load_prompt_pool(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::config_error, "prompt pool directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  PromptPool pool;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream contents;
    contents << in.rdbuf();
    try {
      pool.templates.push_back(parse_prompt_file(contents.str()));
    } catch (const Error& e) {
      throw Error(ErrorKind::template_error, file.filename().string() + ": " + e.what());
    }
  }
  pool.validate();
  return pool;
}

void save_prompt_pool(const PromptPool& pool, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  for (std::size_t i = 0; i < pool.templates.size(); ++i) {
    const auto& tmpl = pool.templates[i];
    char prefix[8];
    std::snprintf(prefix, sizeof(prefix), "%02zu-", i + 1);
    const auto path = dir / (prefix + tmpl.id + ".txt");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io_error, "cannot write " + path.string());
    out << format_prompt_file(tmpl);
  }
}

}  // namespace toc
