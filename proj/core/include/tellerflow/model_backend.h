#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tellerflow/types.h"

namespace tellerflow {

enum class AgentName { kGuardrails, kIntent, kPayment, kFaq };
std::string_view agent_name(AgentName agent);
std::optional<AgentName> parse_agent_name(std::string_view name);

// Per-agent specialization on the shared backbone: which adapter to load,
// which instruction prompt to render and which output schema to enforce.
struct AdapterSpec {
  AgentName agent = AgentName::kGuardrails;
  std::string adapter_id;
  std::string prompt_template;
  std::string output_schema_id;
};

struct ModelCallRecord {
  std::string adapter_id;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  double latency_ms = 0.0;
  int attempt = 1;

  bool operator==(const ModelCallRecord&) const = default;
};

// Holds exactly one active AdapterSpec per agent.
class AdapterRegistry {
 public:
  AdapterRegistry() = default;
  explicit AdapterRegistry(std::vector<AdapterSpec> specs);

  // JSON array of {agentName, adapterId, promptTemplate, outputSchemaId}.
  static AdapterRegistry load_file(const std::string& path);
  static AdapterRegistry parse(std::string_view json_text);

  const AdapterSpec& get(AgentName agent) const;
  void set(AdapterSpec spec);

 private:
  std::map<AgentName, AdapterSpec> specs_;
};

// Placeholders are `{snake_case}` names. Braces around anything else (JSON
// examples in the template) are left alone.
std::vector<std::string> template_placeholders(std::string_view tmpl);
std::string render_prompt(const AdapterSpec& spec,
                          const std::map<std::string, std::string>& bindings);

// Tokens are maximal letter runs (bytes >= 0x80 count as letters), maximal
// digit runs, and single punctuation characters; whitespace separates.
std::int64_t count_tokens(std::string_view text);

// What a backend sees for one call. `task` lets one adapter serve more than
// one instruction (the FAQ adapter both reformulates and answers).
struct CompletionRequest {
  AgentName agent = AgentName::kGuardrails;
  std::string adapter_id;
  std::string schema_id;
  std::string task;
  std::string system_prompt;
  // Prior turns followed by the current user turn.
  std::vector<ChatTurn> conversation;
  int attempt = 1;
};

class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  // Raw completion text. Throws Error(kBackendUnavailable) on transport
  // failure.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

inline constexpr int kDefaultRetryLimit = 2;
inline constexpr std::string_view kRepairSuffix =
    "Respond with only the required JSON object and nothing else.";

struct StructuredResult {
  AgentOutput output;
  ModelCallRecord record;
};

// Pulls the first balanced JSON object out of model text (tolerating code
// fences or prose around it). Returns nullopt when none parses.
std::optional<std::string> extract_json_object(std::string_view text);

// Calls the backend and validates the reply against spec.output_schema_id.
// Malformed replies are retried with the repair suffix appended to the
// prompt, up to `retry_limit` extra attempts.
//
// Throws Error(kSchemaViolation) once retries are exhausted and
// Error(kBackendUnavailable) on transport failure.
StructuredResult complete_structured(ModelBackend& backend, const AdapterSpec& spec,
                                     const std::string& prompt,
                                     const std::vector<ChatTurn>& conversation,
                                     std::string_view task = "default",
                                     int retry_limit = kDefaultRetryLimit);

}  // namespace tellerflow
