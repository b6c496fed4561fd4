#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include "toc/error.hpp"
#include "toc/gateway.hpp"

namespace toc {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::config_error, "endpoint must be an absolute URL: '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

}  // namespace

RemoteBackend::RemoteBackend(std::vector<ModelSpec> models, RetryPolicy policy) : policy_(policy) {
  if (policy_.attempts < 1) throw Error(ErrorKind::config_error, "retry attempts must be >= 1");
  for (auto& model : models) {
    split_endpoint(model.endpoint);
    if (!models_.emplace(model.id, std::move(model)).second) {
      throw Error(ErrorKind::config_error, "duplicate model id in pool");
    }
  }
}

json RemoteBackend::request_body(const ModelSpec& model, const CompletionRequest& request) {
  return {{"model", model.id},
          {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
          {"temperature", request.temperature},
          {"max_tokens", model.max_output_tokens}};
}

std::string RemoteBackend::response_content(std::string_view body) {
  try {
    const auto doc = json::parse(body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::backend_error, std::string("malformed completion response: ") + e.what());
  }
}

Completion RemoteBackend::complete(const CompletionRequest& request) {
  const auto found = models_.find(request.model_id);
  if (found == models_.end()) {
    throw Error(ErrorKind::config_error, "model '" + request.model_id + "' is not configured");
  }
  const ModelSpec& model = found->second;

  httplib::Headers headers;
  if (!model.auth_env_var.empty()) {
    const char* credential = std::getenv(model.auth_env_var.c_str());
    if (credential == nullptr || *credential == '\0') {
      throw Error(ErrorKind::config_error, "credential variable " + model.auth_env_var + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + credential);
  }

  const auto endpoint = split_endpoint(model.endpoint);
  const std::string body = request_body(model, request).dump();
  const auto started = std::chrono::steady_clock::now();

  std::string last_error;
  int attempts_made = 0;
  auto backoff = policy_.initial_backoff;
  for (int attempt = 1; attempt <= policy_.attempts; ++attempt) {
    attempts_made = attempt;
    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(policy_.request_timeout);
    client.set_read_timeout(policy_.request_timeout);
    client.set_write_timeout(policy_.request_timeout);

    auto result = client.Post(endpoint.path, headers, body, "application/json");
    if (result && result->status >= 200 && result->status < 300) {
      auto text = response_content(result->body);
      const auto elapsed = std::chrono::steady_clock::now() - started;
      return {std::move(text), std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count()};
    }
    if (!result) {
      last_error = "transport: " + httplib::to_string(result.error());
    } else {
      last_error = "HTTP " + std::to_string(result->status) + ": " + result->body.substr(0, 200);
      if (!retryable_status(result->status)) break;
    }
    if (attempt < policy_.attempts) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(static_cast<std::int64_t>(backoff.count() * policy_.multiplier));
    }
  }
  throw Error(ErrorKind::backend_error, model.id + " via " + model.endpoint + " failed after " +
                                             std::to_string(attempts_made) + " attempt(s): " + last_error);
}

}  // namespace toc
