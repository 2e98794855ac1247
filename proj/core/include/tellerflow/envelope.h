#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tellerflow/model_backend.h"
#include "tellerflow/types.h"

namespace tellerflow {

struct StageRecord {
  Stage stage = Stage::kGuardrails;
  std::string schema_id;
  // Canonical serialization of the stage output; parses back via
  // parse_canonical(schema_id, verdict_digest).
  std::string verdict_digest;
  double latency_ms = 0.0;
  std::optional<ModelCallRecord> backend_call;
};

struct AgentFailureInfo {
  Stage stage = Stage::kGuardrails;
  std::string cause;
};

class PaymentSessionState;

// Per-request context threaded through every stage.
struct PipelineEnvelope {
  std::string session_id;
  std::string account_id;
  ChatTurn turn;
  std::vector<ChatTurn> history;
  Language language = Language::kAuto;
  std::vector<StageRecord> stage_trace;
  std::optional<std::string> final_reply;

  // Typed copies of what the stages produced, for callers that need more
  // than the digests (gateway previews, eval scoring).
  std::optional<GuardrailVerdict> guardrail;
  std::optional<IntentResult> intent;
  std::optional<AgentOutput> action_output;
  std::optional<ConfirmationRequest> confirmation;
  std::optional<AgentFailureInfo> failure;
  std::vector<ModelCallRecord> model_calls;
  // Documents the FAQ answer was grounded on, best first; empty on fallback.
  std::vector<std::string> grounding_doc_ids;

  // Session-owned payment draft state; null for one-shot runs.
  PaymentSessionState* payment_state = nullptr;
};

// Trims history to the most recent `max_exchanges` user/assistant pairs,
// dropping oldest first and keeping role alternation intact.
std::vector<ChatTurn> cap_history(std::vector<ChatTurn> history, std::size_t max_exchanges);

inline constexpr std::size_t kDefaultHistoryCap = 10;

// One stage's result: its structured output and the model call (if any).
struct StageOutput {
  AgentOutput output;
  std::optional<ModelCallRecord> call;
  std::vector<ModelCallRecord> extra_calls;
};

// Result of the action stage. `confirmation` is set when the action created
// a transaction that now waits on the user's decision.
struct ActionOutput {
  StageOutput stage;
  std::string reply;
  std::optional<ConfirmationRequest> confirmation;
};

class GuardrailStage {
 public:
  virtual ~GuardrailStage() = default;
  virtual StageOutput screen(const PipelineEnvelope& envelope) = 0;
};

class IntentStage {
 public:
  virtual ~IntentStage() = default;
  virtual StageOutput classify(const PipelineEnvelope& envelope) = 0;
};

class ActionHandler {
 public:
  virtual ~ActionHandler() = default;
  virtual ActionOutput handle(PipelineEnvelope& envelope) = 0;
};

// Read-only after startup; shareable across threads.
struct AgentRegistry {
  std::shared_ptr<GuardrailStage> guardrails;
  std::shared_ptr<IntentStage> intent;
  std::shared_ptr<class ActionRouter> actions;
};

inline constexpr std::string_view kApologyReply =
    "Sorry, something went wrong while handling your request. Please try again in a moment.";

// Runs Guardrails -> Intent -> Action -> Confirmation. Unsafe input stops
// after Guardrails; a clarification stops after Intent. A stage that throws
// Error(kAgentFailure / kSchemaViolation / kBackendUnavailable) stops the run
// with a partial trace and the apology reply. Throws Error(kInputRejected)
// for a turn with neither text nor attachments, before any stage runs.
PipelineEnvelope run_pipeline(PipelineEnvelope envelope, const AgentRegistry& deps);

}  // namespace tellerflow
