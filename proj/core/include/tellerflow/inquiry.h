#pragma once

#include <memory>

#include "tellerflow/banking_core.h"
#include "tellerflow/envelope.h"

namespace tellerflow {

// Deterministic handlers for the inquiry intents; no model involved.

class AccountInquiryHandler : public ActionHandler {
 public:
  explicit AccountInquiryHandler(std::shared_ptr<const Bank> bank) : bank_(std::move(bank)) {}
  ActionOutput handle(PipelineEnvelope& envelope) override;

 private:
  std::shared_ptr<const Bank> bank_;
};

class HistoryInquiryHandler : public ActionHandler {
 public:
  explicit HistoryInquiryHandler(std::shared_ptr<const Bank> bank, std::size_t max_items = 5)
      : bank_(std::move(bank)), max_items_(max_items) {}
  ActionOutput handle(PipelineEnvelope& envelope) override;

 private:
  std::shared_ptr<const Bank> bank_;
  std::size_t max_items_;
};

// Spend summary grouped by transfer reference over the recorded history.
class InsightHandler : public ActionHandler {
 public:
  explicit InsightHandler(std::shared_ptr<const Bank> bank) : bank_(std::move(bank)) {}
  ActionOutput handle(PipelineEnvelope& envelope) override;

 private:
  std::shared_ptr<const Bank> bank_;
};

}  // namespace tellerflow
