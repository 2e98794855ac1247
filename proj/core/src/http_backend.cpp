#include "tellerflow/http_backend.h"

#include <cstdlib>

#include "httplib.h"
#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"

namespace tellerflow {

namespace {

std::string env_or(const std::string& value, const char* name) {
  if (!value.empty()) return value;
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

}  // namespace

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {
  config_.base_url = env_or(config_.base_url, "TELLERFLOW_BACKEND_URL");
  config_.api_key = env_or(config_.api_key, "TELLERFLOW_BACKEND_KEY");
  if (config_.base_url.empty()) {
    throw Error(ErrorCode::kConfigError, "HTTP backend needs a base URL (TELLERFLOW_BACKEND_URL)");
  }
  if (config_.base_url.rfind("http://", 0) != 0) {
    throw Error(ErrorCode::kConfigError, "HTTP backend supports plain http:// endpoints only");
  }
}

std::string HttpChatBackend::complete(const CompletionRequest& request) {
  Json messages = Json::array();
  messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
  for (const auto& turn : request.conversation) {
    messages.push_back(
        {{"role", turn.role == Role::kUser ? "user" : "assistant"}, {"content", turn.text}});
  }
  Json body{{"model", request.adapter_id}, {"messages", std::move(messages)}};
  for (const auto& [k, v] : config_.decoding) body[k] = v;

  httplib::Client client(config_.base_url);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(config_.path, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kBackendUnavailable,
                "model endpoint unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kBackendUnavailable,
                "model endpoint returned HTTP " + std::to_string(res->status));
  }
  Json reply = Json::parse(res->body, nullptr, false);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::kBackendUnavailable, "model endpoint returned an unexpected payload");
  }
}

}  // namespace tellerflow
