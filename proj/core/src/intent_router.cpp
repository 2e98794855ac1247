#include "tellerflow/intent_router.h"

#include "tellerflow/errors.h"
#include "tellerflow/text.h"

namespace tellerflow {

IntentClassifier::IntentClassifier(std::shared_ptr<ModelBackend> backend, AdapterSpec spec)
    : backend_(std::move(backend)), spec_(std::move(spec)) {}

IntentResult IntentClassifier::classify_intent(const ChatTurn& turn,
                                               const std::vector<ChatTurn>& history,
                                               std::optional<ModelCallRecord>* call) {
  std::vector<ChatTurn> conversation = history;
  conversation.push_back(turn);
  try {
    std::string prompt = render_prompt(spec_, {{"language", "auto"}});
    auto result = complete_structured(*backend_, spec_, prompt, conversation, "classify");
    if (call) *call = result.record;
    return std::get<IntentResult>(result.output);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSchemaViolation && e.code() != ErrorCode::kBackendUnavailable) {
      throw;
    }
    return IntentResult{IntentCategory::kChat, true, std::string(kRephraseMessage)};
  }
}

StageOutput IntentClassifier::classify(const PipelineEnvelope& envelope) {
  // Images only ever carry bills, receipts and screenshots to pay.
  if (!envelope.turn.attachments.empty() && text::trim(envelope.turn.text).empty()) {
    return {IntentResult{IntentCategory::kPayment, false, std::nullopt}, std::nullopt, {}};
  }
  std::optional<ModelCallRecord> call;
  IntentResult result = classify_intent(envelope.turn, envelope.history, &call);
  return {result, call, {}};
}

void ActionRouter::register_handler(IntentCategory intent, std::shared_ptr<ActionHandler> handler) {
  handlers_[intent] = std::move(handler);
}

ActionHandler& ActionRouter::dispatch(const IntentResult& result) const {
  return dispatch(result.intent);
}

ActionHandler& ActionRouter::dispatch(IntentCategory intent) const {
  auto it = handlers_.find(intent);
  if (it == handlers_.end() || !it->second) {
    throw Error(ErrorCode::kUnroutableIntent,
                "no handler registered for " + std::string(intent_name(intent)));
  }
  return *it->second;
}

void ActionRouter::assert_total() const {
  for (int i = 0; i < kIntentCategoryCount; ++i) {
    auto intent = static_cast<IntentCategory>(i);
    auto it = handlers_.find(intent);
    if (it == handlers_.end() || !it->second) {
      throw Error(ErrorCode::kConfigError,
                  "no handler registered for " + std::string(intent_name(intent)));
    }
  }
}

ActionOutput ChatResponder::handle(PipelineEnvelope&) {
  InquiryResult r;
  r.kind = "chat";
  r.message =
      "Hello! I'm your banking assistant. I can help you transfer money, check your balance "
      "and transaction history, or answer questions about our services.";
  ActionOutput out;
  out.reply = r.message;
  out.stage.output = std::move(r);
  return out;
}

}  // namespace tellerflow
