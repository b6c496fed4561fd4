#pragma once

// Completion gateway: one interface over remote chat-completion endpoints and
// a scripted backend that replays a transcript. A Gateway instance is scoped
// to one run and keeps the audit log that the run's word metrics come from.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace toc {

enum class RequestTag { node_generation, reflection, summarize, helper_tool, prompt_evolution };

std::string_view to_string(RequestTag tag);
RequestTag request_tag_from_string(std::string_view text);

struct ModelSpec {
  std::string id;
  std::string endpoint;
  std::string auth_env_var;
  double temperature = 0.1;
  int max_output_tokens = 2048;
};

struct CompletionRequest {
  std::string model_id;
  std::string prompt;
  double temperature = 0.1;
  RequestTag tag = RequestTag::node_generation;
};

struct Completion {
  std::string text;
  // Backend-reported latency. Scripted backends report 0 so that replayed
  // runs stay byte-identical.
  std::int64_t latency_ms = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual Completion complete(const CompletionRequest& request) = 0;
  // An ordered backend resolves batched requests strictly in submission
  // order; an unordered one may serve them concurrently.
  virtual bool ordered() const { return false; }
};

// ---------------------------------------------------------------------------
// Scripted transcripts

enum class MatcherKind { exact_prompt, substring, tag_and_ordinal };

std::string_view to_string(MatcherKind kind);
MatcherKind matcher_kind_from_string(std::string_view text);

struct TranscriptEntry {
  MatcherKind kind = MatcherKind::exact_prompt;
  // exact_prompt: the whole prompt. substring: a fragment of the prompt.
  // tag_and_ordinal: "<tag>:<n>", the n-th request (1-based) with that tag.
  std::string value;
  std::string response;
  // 0 means unlimited.
  int max_uses = 1;
  // When set, a match raises backend_error instead of answering.
  bool fail = false;
};

struct Transcript {
  std::vector<TranscriptEntry> entries;

  static Transcript from_json(const nlohmann::json& doc);
  static Transcript load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

// Consumption state over a transcript. Each run gets a fresh cursor, so a
// single task replays identically whether it runs alone or inside a suite.
class TranscriptCursor {
 public:
  explicit TranscriptCursor(std::shared_ptr<const Transcript> transcript);

  // First matching entry with uses left; throws transcript_miss otherwise.
  std::string lookup(const CompletionRequest& request);
  int uses(std::size_t entry) const { return uses_.at(entry); }

 private:
  std::shared_ptr<const Transcript> transcript_;
  std::vector<int> uses_;
  std::map<RequestTag, int> tag_counts_;
};

std::string scripted_lookup(TranscriptCursor& cursor, const CompletionRequest& request);

class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::shared_ptr<const Transcript> transcript);

  Completion complete(const CompletionRequest& request) override;
  bool ordered() const override { return true; }

 private:
  std::mutex mutex_;
  TranscriptCursor cursor_;
};

// ---------------------------------------------------------------------------
// Remote chat-completion endpoints

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::seconds request_timeout{120};
};

class RemoteBackend final : public Backend {
 public:
  RemoteBackend(std::vector<ModelSpec> models, RetryPolicy policy = {});

  Completion complete(const CompletionRequest& request) override;

  // The request body sent for `request`; exposed for wire-format checks.
  static nlohmann::json request_body(const ModelSpec& model, const CompletionRequest& request);
  static std::string response_content(std::string_view body);

 private:
  std::map<std::string, ModelSpec> models_;
  RetryPolicy policy_;
};

// ---------------------------------------------------------------------------
// Gateway

struct AuditEntry {
  RequestTag tag = RequestTag::node_generation;
  std::string model_id;
  std::int64_t duration_ms = 0;
  std::int64_t words = 0;
  bool ok = true;
};

struct BatchReply {
  std::optional<std::string> text;
  std::string error;
};

class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Backend> backend);

  // Throws backend_error / transcript_miss / config_error from the backend.
  std::string complete(const CompletionRequest& request);

  // Issues every request and returns replies in input order. Backend
  // failures are reported per reply; config errors still throw. Ordered
  // backends see the requests sequentially.
  std::vector<BatchReply> complete_batch(const std::vector<CompletionRequest>& requests);

  std::vector<AuditEntry> audit() const;
  std::int64_t output_words() const;
  std::size_t call_count() const;
  std::size_t call_count(RequestTag tag) const;

 private:
  std::shared_ptr<Backend> backend_;
  mutable std::mutex audit_mutex_;
  std::vector<AuditEntry> audit_;
};

// Uniform, deterministic pick keyed on (seed, layer, index).
const ModelSpec& sample_model(const std::vector<ModelSpec>& pool, std::uint64_t seed, int layer, int index);

}  // namespace toc
