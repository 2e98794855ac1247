#include "tellerflow/config.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"

#ifndef TELLERFLOW_DEFAULT_DATA_DIR
#define TELLERFLOW_DEFAULT_DATA_DIR "data"
#endif

namespace tellerflow {

std::string AppConfig::resolve(const std::string& path) const {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

std::string default_data_dir() {
  if (const char* env = std::getenv("TELLERFLOW_DATA_DIR")) return env;
  return TELLERFLOW_DEFAULT_DATA_DIR;
}

namespace {

Money money_field(const Json& j, const char* key, Money fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (it->is_string()) {
    if (auto m = Money::parse(it->get<std::string>())) return *m;
    throw Error(ErrorCode::kConfigError, std::string("bad amount for ") + key);
  }
  if (it->is_number()) return Money::from_decimal(it->get<double>());
  throw Error(ErrorCode::kConfigError, std::string("bad amount for ") + key);
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it != j.end() && !it->is_null()) out = it->get<T>();
}

}  // namespace

AppConfig parse_config(std::string_view json_text, const std::string& base_dir) {
  Json j = Json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kConfigError, "config must be a JSON object");
  }
  AppConfig c;
  c.base_dir = base_dir;
  try {
    std::string backend = j.value("backend", "fixture");
    if (backend == "fixture") {
      c.backend = BackendKind::kFixture;
    } else if (backend == "http") {
      c.backend = BackendKind::kHttpChatCompletion;
    } else {
      throw Error(ErrorCode::kConfigError, "unknown backend " + backend);
    }
    if (auto it = j.find("http"); it != j.end()) {
      read(*it, "baseUrl", c.http.base_url);
      read(*it, "path", c.http.path);
      read(*it, "apiKey", c.http.api_key);
      if (it->contains("timeoutMs")) c.http.timeout = std::chrono::milliseconds((*it)["timeoutMs"].get<long>());
      read(*it, "decoding", c.http.decoding);
    }

    if (auto it = j.find("paths"); it != j.end()) {
      const Json& p = *it;
      read(p, "adapters", c.adapters_path);
      read(p, "fixtureTable", c.fixture_table_path);
      read(p, "blocklist", c.blocklist_path);
      read(p, "banks", c.banks_path);
      read(p, "identifierRules", c.identifier_rules_path);
      read(p, "aml", c.aml_path);
      read(p, "ocrFixtures", c.ocr_fixtures_path);
      read(p, "imageFlags", c.image_flags_path);
      read(p, "accounts", c.accounts_path);
      read(p, "knowledge", c.knowledge_path);
      read(p, "audit", c.audit_path);
    }

    c.bank.two_fa.threshold = money_field(j, "twoFactorThreshold", c.bank.two_fa.threshold);
    if (auto it = j.find("limits"); it != j.end()) {
      c.bank.limits.per_transaction = money_field(*it, "perTransaction", c.bank.limits.per_transaction);
      c.bank.limits.daily = money_field(*it, "daily", c.bank.limits.daily);
    }
    read(j, "utcOffsetMinutes", c.bank.utc_offset_minutes);

    if (auto it = j.find("faq"); it != j.end()) {
      read(*it, "retrieveK", c.faq.retrieve_k);
      read(*it, "generateK", c.faq.generate_k);
      read(*it, "alpha", c.faq.alpha);
      read(*it, "confidenceThreshold", c.faq.confidence_threshold);
    }
    read(j, "embeddingDim", c.embedding_dim);
    read(j, "historyCap", c.history_cap);
    if (j.contains("sessionIdleExpirySeconds")) {
      c.session_idle_expiry = std::chrono::seconds(j["sessionIdleExpirySeconds"].get<long>());
    }
    read(j, "adminToken", c.admin_token);
    read(j, "devMode", c.dev_mode);

    if (auto it = j.find("prices"); it != j.end()) {
      for (auto p = it->begin(); p != it->end(); ++p) {
        PriceEntry e;
        read(p.value(), "promptPer1k", e.prompt_per_1k);
        read(p.value(), "completionPer1k", e.completion_per_1k);
        c.prices[p.key()] = e;
      }
    }
    if (auto it = j.find("eval"); it != j.end()) {
      read(*it, "targetLatencyMs", c.target_latency_ms);
      read(*it, "costBudget", c.cost_budget_per_interaction);
      read(*it, "maxTransactionalErrorRate", c.max_transactional_error_rate);
      read(*it, "maxFaqErrorRate", c.max_faq_error_rate);
      read(*it, "workers", c.eval_workers);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("config: ") + e.what());
  }
  if (c.faq.alpha < 0.0 || c.faq.alpha > 1.0) throw Error(ErrorCode::kConfigError, "faq.alpha must be in [0, 1]");
  if (c.faq.retrieve_k == 0 || c.faq.generate_k == 0) {
    throw Error(ErrorCode::kConfigError, "faq.retrieveK and faq.generateK must be positive");
  }
  if (c.history_cap == 0) throw Error(ErrorCode::kConfigError, "historyCap must be positive");
  if (c.eval_workers == 0) c.eval_workers = 1;
  return c;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_config(buf.str(), dir.empty() ? "." : dir);
}

}  // namespace tellerflow
