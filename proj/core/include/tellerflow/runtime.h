#pragma once

#include <memory>

#include "tellerflow/audit.h"
#include "tellerflow/banking_core.h"
#include "tellerflow/config.h"
#include "tellerflow/envelope.h"
#include "tellerflow/faq_agent.h"
#include "tellerflow/guardrails.h"
#include "tellerflow/intent_router.h"
#include "tellerflow/model_backend.h"
#include "tellerflow/payment_agent.h"

namespace tellerflow {

// Everything one process needs, wired from a config.
struct Runtime {
  AppConfig config;
  std::shared_ptr<ModelBackend> backend;
  AdapterRegistry adapters;
  std::shared_ptr<AuditLog> audit;
  std::shared_ptr<BlocklistStore> blocklist;
  std::shared_ptr<const ImageModerator> moderator;
  std::shared_ptr<const BankDirectory> directory;
  std::shared_ptr<const IdentifierRules> identifier_rules;
  std::shared_ptr<const OcrEngine> ocr;
  std::shared_ptr<Bank> bank;
  std::shared_ptr<VectorStore> knowledge;

  std::shared_ptr<Guardrails> guardrails;
  std::shared_ptr<IntentClassifier> intent;
  std::shared_ptr<PaymentAgent> payment;
  std::shared_ptr<FaqAgent> faq;
  AgentRegistry registry;
};

// Builds the runtime. `backend_override` replaces the configured backend
// (tests inject scripted or slow backends this way).
std::shared_ptr<Runtime> build_runtime(const AppConfig& config,
                                       std::shared_ptr<ModelBackend> backend_override = nullptr,
                                       Bank::ClockFn clock = [] { return Clock::now(); });

}  // namespace tellerflow
