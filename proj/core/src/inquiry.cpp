#include "tellerflow/inquiry.h"

#include <map>

#include "tellerflow/errors.h"

namespace tellerflow {

namespace {

ActionOutput reply_with(InquiryResult r) {
  ActionOutput out;
  out.reply = r.message;
  out.stage.output = std::move(r);
  return out;
}

ActionOutput no_account() {
  return reply_with({"account", "I couldn't find a linked account for this session.", {}});
}

}  // namespace

ActionOutput AccountInquiryHandler::handle(PipelineEnvelope& envelope) {
  if (!bank_->has_account(envelope.account_id)) return no_account();
  AccountSummary s = bank_->query_account(envelope.account_id);
  InquiryResult r;
  r.kind = "account";
  r.message = "Your available balance is " + s.available_balance.to_display_string() + ".";
  if (s.status == AccountStatus::kFrozen) r.message += " This account is currently frozen.";
  r.fields = {{"accountId", s.account_id},
              {"holderName", s.holder_name},
              {"availableBalance", s.available_balance.to_decimal_string()},
              {"transferredToday", s.daily_outflow.to_decimal_string()}};
  return reply_with(std::move(r));
}

ActionOutput HistoryInquiryHandler::handle(PipelineEnvelope& envelope) {
  if (!bank_->has_account(envelope.account_id)) return no_account();
  auto records = bank_->query_history(envelope.account_id);
  InquiryResult r;
  r.kind = "history";
  if (records.empty()) {
    r.message = "You have no transfers on record yet.";
    return reply_with(std::move(r));
  }
  r.message = "Here are your most recent transfers:";
  for (std::size_t i = 0; i < records.size() && i < max_items_; ++i) {
    const auto& t = records[i];
    std::string line = t.amount.to_display_string() + " to " + t.recipient_name + " (" +
                       t.bank_name + "), " + t.reference;
    r.message += "\n- " + line;
    r.fields.emplace_back(t.tx_id, line);
  }
  return reply_with(std::move(r));
}

ActionOutput InsightHandler::handle(PipelineEnvelope& envelope) {
  if (!bank_->has_account(envelope.account_id)) return no_account();
  auto records = bank_->query_history(envelope.account_id);
  InquiryResult r;
  r.kind = "insight";
  if (records.empty()) {
    r.message = "There isn't any spending to summarise yet.";
    return reply_with(std::move(r));
  }
  std::map<std::string, Money> by_reference;
  Money total;
  for (const auto& t : records) {
    by_reference[t.reference] += t.amount;
    total += t.amount;
  }
  r.message = "You have transferred " + total.to_display_string() + " in total.";
  for (const auto& [ref, amount] : by_reference) {
    r.message += "\n- " + ref + ": " + amount.to_display_string();
    r.fields.emplace_back(ref, amount.to_decimal_string());
  }
  return reply_with(std::move(r));
}

}  // namespace tellerflow
