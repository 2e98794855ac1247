#pragma once

#include <chrono>
#include <map>
#include <string>

#include "tellerflow/model_backend.h"

namespace tellerflow {

struct HttpBackendConfig {
  // e.g. "http://127.0.0.1:8000"; read from TELLERFLOW_BACKEND_URL when empty.
  std::string base_url;
  std::string path = "/v1/chat/completions";
  // Bearer token; read from TELLERFLOW_BACKEND_KEY when empty.
  std::string api_key;
  std::chrono::milliseconds timeout{30000};
  // Passed through verbatim (temperature, top_p, ...).
  std::map<std::string, double> decoding;
};

// Generic chat-completion client. The adapter id goes into the "model"
// field, the rendered instruction prompt is the system message.
class HttpChatBackend : public ModelBackend {
 public:
  explicit HttpChatBackend(HttpBackendConfig config);

  std::string complete(const CompletionRequest& request) override;

  const HttpBackendConfig& config() const { return config_; }

 private:
  HttpBackendConfig config_;
};

}  // namespace tellerflow
