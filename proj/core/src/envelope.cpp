#include "tellerflow/envelope.h"

#include <chrono>

#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"
#include "tellerflow/intent_router.h"
#include "tellerflow/text.h"

namespace tellerflow {

std::vector<ChatTurn> cap_history(std::vector<ChatTurn> history, std::size_t max_exchanges) {
  // Count exchanges from the back; an exchange starts at a user turn.
  std::size_t exchanges = 0;
  std::size_t cut = history.size();
  for (std::size_t i = history.size(); i-- > 0;) {
    if (history[i].role != Role::kUser) continue;
    if (exchanges == max_exchanges) break;
    ++exchanges;
    cut = i;
  }
  if (exchanges == 0) return {};
  history.erase(history.begin(), history.begin() + static_cast<std::ptrdiff_t>(cut));
  return history;
}

namespace {

bool stops_pipeline(ErrorCode code) {
  return code == ErrorCode::kAgentFailure || code == ErrorCode::kSchemaViolation ||
         code == ErrorCode::kBackendUnavailable || code == ErrorCode::kUnroutableIntent;
}

void record(PipelineEnvelope& env, Stage stage, const StageOutput& out, double latency_ms) {
  StageRecord rec;
  rec.stage = stage;
  rec.schema_id = std::string(schema_of(out.output));
  rec.verdict_digest = canonical_serialize(out.output);
  rec.latency_ms = latency_ms;
  rec.backend_call = out.call;
  env.stage_trace.push_back(std::move(rec));
  for (const auto& c : out.extra_calls) env.model_calls.push_back(c);
  if (out.call) env.model_calls.push_back(*out.call);
}

void fail(PipelineEnvelope& env, Stage stage, const Error& e) {
  env.failure = AgentFailureInfo{stage, e.what()};
  env.final_reply = std::string(kApologyReply);
}

double since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

PipelineEnvelope run_pipeline(PipelineEnvelope env, const AgentRegistry& deps) {
  if (text::trim(env.turn.text).empty() && env.turn.attachments.empty()) {
    throw Error(ErrorCode::kInputRejected, "message has neither text nor attachments");
  }

  auto start = std::chrono::steady_clock::now();
  StageOutput screened;
  try {
    screened = deps.guardrails->screen(env);
  } catch (const Error& e) {
    if (!stops_pipeline(e.code())) throw;
    fail(env, Stage::kGuardrails, e);
    return env;
  }
  record(env, Stage::kGuardrails, screened, since(start));
  const auto& verdict = std::get<GuardrailVerdict>(screened.output);
  env.guardrail = verdict;
  if (!verdict.is_safe) {
    env.final_reply = verdict.message.value_or("");
    return env;
  }

  start = std::chrono::steady_clock::now();
  StageOutput classified;
  try {
    classified = deps.intent->classify(env);
  } catch (const Error& e) {
    if (!stops_pipeline(e.code())) throw;
    fail(env, Stage::kIntent, e);
    return env;
  }
  record(env, Stage::kIntent, classified, since(start));
  const auto& intent = std::get<IntentResult>(classified.output);
  env.intent = intent;
  if (intent.clarification_needed) {
    env.final_reply = intent.message.value_or(std::string(kRephraseMessage));
    return env;
  }

  start = std::chrono::steady_clock::now();
  ActionOutput acted;
  try {
    acted = deps.actions->dispatch(intent).handle(env);
  } catch (const Error& e) {
    if (!stops_pipeline(e.code())) throw;
    fail(env, Stage::kAction, e);
    return env;
  }
  record(env, Stage::kAction, acted.stage, since(start));
  env.action_output = acted.stage.output;
  env.final_reply = acted.reply;

  if (acted.confirmation) {
    StageOutput confirm{*acted.confirmation, std::nullopt, {}};
    record(env, Stage::kConfirmation, confirm, 0.0);
    env.confirmation = acted.confirmation;
  }
  return env;
}

}  // namespace tellerflow
