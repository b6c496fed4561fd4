#include "toc/gateway.hpp"

#include <chrono>
#include <fstream>
#include <future>

#include "toc/core.hpp"
#include "toc/error.hpp"
#include "toc/sampling.hpp"

namespace toc {

using nlohmann::json;

std::string_view to_string(RequestTag tag) {
  switch (tag) {
    case RequestTag::node_generation: return "node_generation";
    case RequestTag::reflection: return "reflection";
    case RequestTag::summarize: return "summarize";
    case RequestTag::helper_tool: return "helper_tool";
    case RequestTag::prompt_evolution: return "prompt_evolution";
  }
  return "node_generation";
}

RequestTag request_tag_from_string(std::string_view text) {
  for (auto tag : {RequestTag::node_generation, RequestTag::reflection, RequestTag::summarize,
                   RequestTag::helper_tool, RequestTag::prompt_evolution}) {
    if (to_string(tag) == text) return tag;
  }
  throw Error(ErrorKind::config_error, "unknown request tag '" + std::string(text) + "'");
}

std::string_view to_string(MatcherKind kind) {
  switch (kind) {
    case MatcherKind::exact_prompt: return "exact_prompt";
    case MatcherKind::substring: return "substring";
    case MatcherKind::tag_and_ordinal: return "tag_and_ordinal";
  }
  return "exact_prompt";
}

MatcherKind matcher_kind_from_string(std::string_view text) {
  if (text == "exact_prompt") return MatcherKind::exact_prompt;
  if (text == "substring") return MatcherKind::substring;
  if (text == "tag_and_ordinal") return MatcherKind::tag_and_ordinal;
  throw Error(ErrorKind::config_error, "unknown matcher kind '" + std::string(text) + "'");
}

namespace {

struct TagOrdinal {
  RequestTag tag;
  int ordinal;
};

TagOrdinal parse_tag_ordinal(const std::string& value) {
  const auto colon = value.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorKind::config_error, "tag_and_ordinal matcher needs '<tag>:<n>', got '" + value + "'");
  }
  int ordinal = 0;
  try {
    ordinal = std::stoi(value.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorKind::config_error, "bad ordinal in matcher '" + value + "'");
  }
  if (ordinal < 1) throw Error(ErrorKind::config_error, "ordinal must be >= 1 in '" + value + "'");
  return {request_tag_from_string(std::string_view(value).substr(0, colon)), ordinal};
}

}  // namespace

Transcript Transcript::from_json(const json& doc) {
  if (!doc.is_array()) throw Error(ErrorKind::config_error, "transcript must be a list of entries");
  Transcript transcript;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = "transcript[" + std::to_string(i) + "]";
    try {
      TranscriptEntry entry;
      entry.kind = matcher_kind_from_string(item.at("matcher_kind").get<std::string>());
      entry.value = item.at("matcher_value").get<std::string>();
      entry.response = item.value("response", std::string{});
      entry.max_uses = item.value("max_uses", 1);
      entry.fail = item.value("error", false);
      if (entry.max_uses < 0) throw Error(ErrorKind::config_error, "max_uses must be >= 0");
      if (entry.kind == MatcherKind::tag_and_ordinal) parse_tag_ordinal(entry.value);
      transcript.entries.push_back(std::move(entry));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::config_error, where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::config_error, where + ": " + e.what());
    }
  }
  return transcript;
}

Transcript Transcript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config_error, "cannot open transcript " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config_error, path.string() + ": " + e.what());
  }
}

json Transcript::to_json() const {
  json doc = json::array();
  for (const auto& entry : entries) {
    json item = {{"matcher_kind", to_string(entry.kind)},
                 {"matcher_value", entry.value},
                 {"response", entry.response},
                 {"max_uses", entry.max_uses}};
    if (entry.fail) item["error"] = true;
    doc.push_back(std::move(item));
  }
  return doc;
}

TranscriptCursor::TranscriptCursor(std::shared_ptr<const Transcript> transcript)
    : transcript_(std::move(transcript)), uses_(transcript_->entries.size(), 0) {}

std::string TranscriptCursor::lookup(const CompletionRequest& request) {
  const int ordinal = ++tag_counts_[request.tag];
  const auto& entries = transcript_->entries;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& entry = entries[i];
    if (entry.max_uses != 0 && uses_[i] >= entry.max_uses) continue;
    bool matched = false;
    switch (entry.kind) {
      case MatcherKind::exact_prompt:
        matched = request.prompt == entry.value;
        break;
      case MatcherKind::substring:
        matched = request.prompt.find(entry.value) != std::string::npos;
        break;
      case MatcherKind::tag_and_ordinal: {
        const auto key = parse_tag_ordinal(entry.value);
        matched = key.tag == request.tag && key.ordinal == ordinal;
        break;
      }
    }
    if (!matched) continue;
    ++uses_[i];
    if (entry.fail) {
      throw Error(ErrorKind::backend_error, "scripted failure (transcript entry " + std::to_string(i) + ")");
    }
    return entry.response;
  }
  std::string head = request.prompt.substr(0, 120);
  throw Error(ErrorKind::transcript_miss, "no transcript entry for " + std::string(to_string(request.tag)) +
                                              " request #" + std::to_string(ordinal) + ": \"" + head + "\"");
}

std::string scripted_lookup(TranscriptCursor& cursor, const CompletionRequest& request) {
  return cursor.lookup(request);
}

ScriptedBackend::ScriptedBackend(std::shared_ptr<const Transcript> transcript)
    : cursor_(std::move(transcript)) {}

Completion ScriptedBackend::complete(const CompletionRequest& request) {
  std::lock_guard lock(mutex_);
  return {cursor_.lookup(request), 0};
}

Gateway::Gateway(std::shared_ptr<Backend> backend) : backend_(std::move(backend)) {
  if (!backend_) throw Error(ErrorKind::config_error, "gateway has no backend");
}

std::string Gateway::complete(const CompletionRequest& request) {
  AuditEntry entry{request.tag, request.model_id, 0, 0, false};
  try {
    if (request.prompt.empty()) throw Error(ErrorKind::config_error, "completion request has an empty prompt");
    Completion completion = backend_->complete(request);
    entry.duration_ms = completion.latency_ms;
    entry.words = count_output_words(completion.text);
    entry.ok = true;
    std::lock_guard lock(audit_mutex_);
    audit_.push_back(entry);
    return std::move(completion.text);
  } catch (...) {
    std::lock_guard lock(audit_mutex_);
    audit_.push_back(entry);
    throw;
  }
}

std::vector<BatchReply> Gateway::complete_batch(const std::vector<CompletionRequest>& requests) {
  auto one = [this](const CompletionRequest& request) -> BatchReply {
    try {
      return {complete(request), {}};
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::protocol_error || e.kind() == ErrorKind::config_error) throw;
      return {std::nullopt, e.what()};
    } catch (const std::exception& e) {
      return {std::nullopt, e.what()};
    }
  };

  std::vector<BatchReply> replies;
  replies.reserve(requests.size());
  if (backend_->ordered() || requests.size() < 2) {
    for (const auto& request : requests) replies.push_back(one(request));
    return replies;
  }
  std::vector<std::future<BatchReply>> pending;
  pending.reserve(requests.size());
  for (const auto& request : requests) {
    pending.push_back(std::async(std::launch::async, one, std::cref(request)));
  }
  for (auto& future : pending) replies.push_back(future.get());
  return replies;
}

std::vector<AuditEntry> Gateway::audit() const {
  std::lock_guard lock(audit_mutex_);
  return audit_;
}

std::int64_t Gateway::output_words() const {
  std::lock_guard lock(audit_mutex_);
  std::int64_t total = 0;
  for (const auto& entry : audit_) total += entry.words;
  return total;
}

std::size_t Gateway::call_count() const {
  std::lock_guard lock(audit_mutex_);
  return audit_.size();
}

std::size_t Gateway::call_count(RequestTag tag) const {
  std::lock_guard lock(audit_mutex_);
  std::size_t count = 0;
  for (const auto& entry : audit_) count += entry.tag == tag ? 1 : 0;
  return count;
}

const ModelSpec& sample_model(const std::vector<ModelSpec>& pool, std::uint64_t seed, int layer, int index) {
  if (pool.empty()) throw Error(ErrorKind::config_error, "model pool is empty");
  const auto key = sampling::node_key(seed, sampling::Stream::model, layer, index);
  return pool[sampling::uniform_index(key, pool.size())];
}

}  // namespace toc
