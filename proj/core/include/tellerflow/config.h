#pragma once

#include <chrono>
#include <map>
#include <string>

#include "tellerflow/banking_core.h"
#include "tellerflow/faq_agent.h"
#include "tellerflow/http_backend.h"

namespace tellerflow {

enum class BackendKind { kFixture, kHttpChatCompletion };

struct PriceEntry {
  // Currency units per 1,000 tokens.
  double prompt_per_1k = 0.0;
  double completion_per_1k = 0.0;
};

struct AppConfig {
  // Relative paths are resolved against the directory of the config file.
  std::string base_dir = ".";

  BackendKind backend = BackendKind::kFixture;
  HttpBackendConfig http;

  std::string adapters_path = "adapters.json";
  std::string fixture_table_path;
  std::string blocklist_path = "blocklist.json";
  std::string banks_path = "banks.json";
  std::string identifier_rules_path;
  std::string aml_path = "aml.json";
  std::string ocr_fixtures_path = "ocr_fixtures.json";
  std::string image_flags_path;
  std::string accounts_path = "accounts.json";
  std::string knowledge_path = "knowledge.jsonl";
  std::string audit_path;

  BankConfig bank;
  FaqConfig faq;
  std::size_t embedding_dim = kDefaultEmbeddingDim;
  std::size_t history_cap = 10;

  std::chrono::seconds session_idle_expiry{15 * 60};
  // Read from TELLERFLOW_ADMIN_TOKEN when empty.
  std::string admin_token;
  bool dev_mode = false;

  // Per-adapter prices for cost accounting; key "*" is the default.
  std::map<std::string, PriceEntry> prices;
  double target_latency_ms = 1000.0;
  double cost_budget_per_interaction = 0.01;
  double max_transactional_error_rate = 0.005;
  double max_faq_error_rate = 0.02;
  std::size_t eval_workers = 1;

  std::string resolve(const std::string& path) const;
};

// Throws Error(kConfigError) / Error(kFileUnreadable).
AppConfig load_config(const std::string& path);
AppConfig parse_config(std::string_view json_text, const std::string& base_dir);

// Default config shipped in data/, for tests and tools.
std::string default_data_dir();

}  // namespace tellerflow
