#pragma once

#include <map>
#include <memory>
#include <string>

#include "tellerflow/envelope.h"
#include "tellerflow/model_backend.h"

namespace tellerflow {

inline constexpr std::string_view kRephraseMessage = "Could you rephrase that?";

class IntentClassifier : public IntentStage {
 public:
  IntentClassifier(std::shared_ptr<ModelBackend> backend, AdapterSpec spec);

  // Never throws for model trouble: an unusable reply becomes a
  // clarification request.
  IntentResult classify_intent(const ChatTurn& turn, const std::vector<ChatTurn>& history,
                               std::optional<ModelCallRecord>* call = nullptr);

  StageOutput classify(const PipelineEnvelope& envelope) override;

 private:
  std::shared_ptr<ModelBackend> backend_;
  AdapterSpec spec_;
};

// Maps each intent to its action handler. Built once at startup.
class ActionRouter {
 public:
  void register_handler(IntentCategory intent, std::shared_ptr<ActionHandler> handler);

  // Throws Error(kUnroutableIntent) when nothing is registered for `intent`.
  ActionHandler& dispatch(const IntentResult& result) const;
  ActionHandler& dispatch(IntentCategory intent) const;

  // Throws Error(kConfigError) naming the first intent with no handler.
  void assert_total() const;

 private:
  std::map<IntentCategory, std::shared_ptr<ActionHandler>> handlers_;
};

// Canned small-talk reply; steers the user back to banking.
class ChatResponder : public ActionHandler {
 public:
  ActionOutput handle(PipelineEnvelope& envelope) override;
};

}  // namespace tellerflow
