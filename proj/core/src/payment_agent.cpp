#include "tellerflow/payment_agent.h"

#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"
#include "tellerflow/text.h"

namespace tellerflow {

namespace {

constexpr std::string_view kExtractionApology =
    "Sorry, I couldn't process the transfer details just now. Could you send them again?";

std::string field_label(const std::string& field) {
  if (field == "recipientName") return "recipient's name";
  if (field == "bankName") return "bank";
  if (field == "accountNumber") return "account number";
  if (field == "amount") return "amount";
  return field;
}

std::string invalid_message(const Invalid& invalid) {
  std::string msg;
  for (const auto& [field, error] : invalid.field_errors) {
    if (field == "bankName") {
      msg += "The bank name you gave isn't one we support. Which bank does the recipient use? ";
    } else if (field == "amount") {
      msg += "The amount must be greater than zero. How much would you like to transfer? ";
    } else {
      msg += "The " + field_label(field) + " doesn't look right. Could you check it? ";
    }
  }
  return text::trim(msg);
}

std::string precheck_message(ErrorCode code, const std::string& detail) {
  switch (code) {
    case ErrorCode::kInsufficientFunds:
      return "You don't have enough funds for this transfer. Would you like to change the amount?";
    case ErrorCode::kLimitExceeded:
      return "This transfer is over your limit: " + detail + ". Would you like to change the amount?";
    case ErrorCode::kAmlFlagged:
      return "I'm unable to process this transfer. Please contact our Help & Support Center for "
             "assistance.";
    default:
      return "I couldn't set up this transfer. Please try again later.";
  }
}

PrecheckFailure failure_of(ErrorCode code) {
  if (code == ErrorCode::kInsufficientFunds) return PrecheckFailure::kInsufficientFunds;
  if (code == ErrorCode::kAmlFlagged) return PrecheckFailure::kAmlFlagged;
  return PrecheckFailure::kLimitExceeded;
}

// Newer values win; absent values never erase what the session already has.
TransferDraft merge(const TransferDraft& base, const TransferDraft& update) {
  if (base.recipient_name && update.recipient_name &&
      text::normalize(*base.recipient_name) != text::normalize(*update.recipient_name)) {
    return update;
  }
  TransferDraft out = base;
  if (update.recipient_name) out.recipient_name = update.recipient_name;
  if (update.bank_name) out.bank_name = update.bank_name;
  if (update.account_number) out.account_number = update.account_number;
  if (update.amount) out.amount = update.amount;
  if (update.reference != kDefaultReference) out.reference = update.reference;
  return out;
}

}  // namespace

std::string confirmation_prompt(const TransferDraft& draft, bool requires_2fa) {
  std::string msg = "Please confirm the transfer of " +
                    draft.amount.value_or(Money{}).to_display_string() + " to " +
                    draft.recipient_name.value_or("") + " (" + draft.bank_name.value_or("") +
                    ", account " + draft.account_number.value_or("") + "), reference \"" +
                    draft.reference + "\". You can approve, decline or edit it.";
  if (requires_2fa) {
    msg += " A one-time code has been sent to your registered device. You'll need it to approve.";
  }
  return msg;
}

PaymentAgent::PaymentAgent(std::shared_ptr<ModelBackend> backend, AdapterSpec spec,
                           std::shared_ptr<const BankDirectory> directory,
                           std::shared_ptr<const IdentifierRules> rules,
                           std::shared_ptr<const OcrEngine> ocr, std::shared_ptr<Bank> bank)
    : backend_(std::move(backend)),
      spec_(std::move(spec)),
      directory_(std::move(directory)),
      rules_(std::move(rules)),
      ocr_(std::move(ocr)),
      bank_(std::move(bank)) {}

PaymentAgentResult PaymentAgent::extract_fields(const ChatTurn& turn,
                                                const std::vector<ChatTurn>& history,
                                                const std::optional<std::string>& ocr_text,
                                                std::optional<ModelCallRecord>* call) {
  std::vector<ChatTurn> conversation = history;
  ChatTurn current = turn;
  if (ocr_text) {
    current.text = text::trim(current.text + "\n" + *ocr_text);
  }
  conversation.push_back(std::move(current));

  PaymentAgentResult result;
  try {
    std::string prompt =
        render_prompt(spec_, {{"bank_list", directory_->prompt_listing()}, {"language", "auto"}});
    auto structured = complete_structured(*backend_, spec_, prompt, conversation, "extract");
    if (call) *call = structured.record;
    result = std::get<PaymentAgentResult>(structured.output);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSchemaViolation && e.code() != ErrorCode::kBackendUnavailable) throw;
    return PaymentAgentResult{{}, std::string(kExtractionApology)};
  }

  std::vector<std::string> notes;
  for (auto& d : result.transfers) {
    if (d.bank_name) {
      if (auto canon = directory_->canonical(*d.bank_name)) {
        d.bank_name = *canon;
      } else {
        d.bank_name.reset();
        notes.push_back(
            "The bank name you gave isn't one we support. Which bank does the recipient use?");
      }
    }
    if (d.amount && d.amount->minor() <= 0) {
      d.amount.reset();
      notes.push_back("The amount must be greater than zero. How much would you like to transfer?");
    }
    if (d.account_number) d.account_number = text::trim(*d.account_number);
  }
  if (!notes.empty()) result.message = text::join(notes, " ");
  return result;
}

std::string PaymentAgent::ocr_extract(const AttachmentRef& attachment) const {
  if (!ocr_) throw Error(ErrorCode::kOcrUnavailable, "no OCR engine configured");
  return ocr_->transcribe(attachment);
}

PendingTransaction PaymentAgent::submit_for_execution(const TransferDraft& draft,
                                                      const std::string& session_id,
                                                      const std::string& account_id) {
  if (!std::holds_alternative<ReadyForConfirmation>(validate_draft(draft, *directory_, *rules_))) {
    throw Error(ErrorCode::kInvalidState, "draft is not ready for confirmation");
  }
  TransferKind kind = transfer_kind_for(rules_->classify(*draft.account_number));
  return bank_->create_pending(session_id, account_id, draft, kind);
}

PaymentTurnResult PaymentAgent::process_turn(const PipelineEnvelope& envelope,
                                             PaymentSessionState& state) {
  PaymentTurnResult out;

  std::optional<std::string> ocr_text;
  for (const auto& attachment : envelope.turn.attachments) {
    try {
      std::string t = ocr_extract(attachment);
      ocr_text = ocr_text ? *ocr_text + "\n" + t : t;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kOcrUnavailable) throw;
      out.result = {{}, std::string(kOcrUnavailableMessage)};
      out.state = validate_draft(state.draft.value_or(TransferDraft{}), *directory_, *rules_);
      return out;
    }
  }

  std::optional<TransferDraft> raw;
  std::string message;
  bool selected = false;
  if (!state.choices.empty()) {
    if (auto choice = select_choice(envelope.turn.text, state.choices)) {
      raw = state.choices[*choice];
      state.choices.clear();
      selected = true;
    }
  }

  if (!selected) {
    std::optional<ModelCallRecord> call;
    // Validation needs the draft as extracted, before invalid fields are nulled.
    PaymentAgentResult extracted = extract_fields(envelope.turn, envelope.history, ocr_text, &call);
    if (call) out.calls.push_back(*call);
    message = extracted.message;

    if (extracted.transfers.size() > 1) {
      state.choices = extracted.transfers;
      state.draft.reset();
      out.result = resolve_multiple(extracted);
      out.state = AwaitingDisambiguation{extracted.transfers.size()};
      return out;
    }
    if (extracted.transfers.size() == 1) {
      state.choices.clear();
      raw = state.draft ? merge(*state.draft, extracted.transfers.front()) : extracted.transfers.front();
    } else {
      raw = state.draft;
    }
    out.result.message = message;
  }

  TransferDraft draft = raw.value_or(TransferDraft{});
  out.state = validate_draft(draft, *directory_, *rules_);
  if (message.empty() || selected) {
    if (auto* inc = std::get_if<Incomplete>(&out.state)) {
      message = "Could you provide the " + field_label(inc->missing_fields.front()) + "?";
    }
  }
  if (auto* invalid = std::get_if<Invalid>(&out.state)) {
    message = invalid_message(*invalid);
    if (invalid->field_errors.count("bankName")) draft.bank_name.reset();
    if (invalid->field_errors.count("amount")) draft.amount.reset();
    if (invalid->field_errors.count("accountNumber")) draft.account_number.reset();
  }

  if (std::holds_alternative<ReadyForConfirmation>(out.state)) {
    try {
      PendingTransaction tx = submit_for_execution(draft, envelope.session_id, envelope.account_id);
      out.pending = tx;
      state.pending_tx_id = tx.tx_id;
      state.draft.reset();
      message = confirmation_prompt(tx.draft, tx.requires_2fa);
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::kInsufficientFunds:
        case ErrorCode::kLimitExceeded:
        case ErrorCode::kAmlFlagged:
          out.precheck_failure = failure_of(e.code());
          message = precheck_message(e.code(), e.what());
          state.draft = draft;
          break;
        case ErrorCode::kUnknownAccount:
          message = "I couldn't find a linked account to send from. Please sign in again.";
          state.draft = draft;
          break;
        default:
          throw;
      }
    }
  } else {
    state.draft = draft;
  }

  if (raw) out.result.transfers = {draft};
  out.result.message = message.empty() ? std::string(kExtractionApology) : message;
  return out;
}

ActionOutput PaymentAgent::handle(PipelineEnvelope& envelope) {
  PaymentSessionState local;
  PaymentSessionState& state = envelope.payment_state ? *envelope.payment_state : local;
  PaymentTurnResult turn = process_turn(envelope, state);

  ActionOutput out;
  out.stage.output = turn.result;
  if (!turn.calls.empty()) {
    out.stage.call = turn.calls.back();
    out.stage.extra_calls.assign(turn.calls.begin(), turn.calls.end() - 1);
  }
  out.reply = turn.result.message;
  if (turn.pending) {
    out.confirmation = ConfirmationRequest{turn.pending->tx_id, turn.pending->draft,
                                           turn.pending->kind, turn.pending->requires_2fa,
                                           std::string(tx_state_name(turn.pending->state))};
  }
  return out;
}

}  // namespace tellerflow
