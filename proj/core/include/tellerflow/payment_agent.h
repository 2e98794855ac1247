#pragma once

#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <variant>
#include <vector>

#include "tellerflow/banking_core.h"
#include "tellerflow/envelope.h"
#include "tellerflow/model_backend.h"

namespace tellerflow {

struct BankEntry {
  std::string bank_name;
  std::vector<std::string> aliases;
  std::string routing_code;
};

// Supported banks. Lookups are case- and whitespace-insensitive over the
// canonical name and every alias.
class BankDirectory {
 public:
  BankDirectory() = default;
  explicit BankDirectory(std::vector<BankEntry> entries);

  // [{"bankName", "aliases": [...], "routingCode"}].
  static BankDirectory load_file(const std::string& path);
  static BankDirectory parse(std::string_view json_text);

  // Canonical bank name for a name or alias.
  std::optional<std::string> canonical(std::string_view name) const;
  bool contains(std::string_view name) const { return canonical(name).has_value(); }

  const std::vector<BankEntry>& entries() const { return entries_; }
  // One prompt line per bank, in directory order.
  std::string prompt_listing() const;

 private:
  std::vector<BankEntry> entries_;
  std::map<std::string, std::string> by_key_;
};

enum class IdentifierKind { kAccount, kPhone, kNric, kBusinessId };
std::string_view identifier_kind_name(IdentifierKind kind);

struct IdentifierRule {
  IdentifierKind kind;
  std::string pattern;
  std::regex compiled;
};

// Syntax table for recipient identifiers; first matching rule wins.
class IdentifierRules {
 public:
  // 6-20 digit account, Malaysian mobile, 12-digit NRIC, alphanumeric
  // business registration id.
  static IdentifierRules defaults();
  // [{"kind": "account"|"phone"|"nric"|"businessId", "pattern": "..."}].
  static IdentifierRules parse(const std::string& json_text);

  void add(IdentifierKind kind, const std::string& pattern);
  std::optional<IdentifierKind> classify(std::string_view identifier) const;

 private:
  std::vector<IdentifierRule> rules_;
};

// Business registration ids pay merchants; everything else is P2P.
TransferKind transfer_kind_for(std::optional<IdentifierKind> kind);

struct Incomplete {
  std::vector<std::string> missing_fields;
  bool operator==(const Incomplete&) const = default;
};
struct Invalid {
  std::map<std::string, std::string> field_errors;
  bool operator==(const Invalid&) const = default;
};
struct AwaitingDisambiguation {
  std::size_t count = 0;
  bool operator==(const AwaitingDisambiguation&) const = default;
};
struct ReadyForConfirmation {
  bool operator==(const ReadyForConfirmation&) const = default;
};
using CompletionState =
    std::variant<Incomplete, Invalid, AwaitingDisambiguation, ReadyForConfirmation>;

std::string completion_state_label(const CompletionState& state);

inline constexpr std::string_view kAmountError = "must be greater than zero";
inline constexpr std::string_view kBankError = "bank name is invalid";
inline constexpr std::string_view kIdentifierError = "identifier format is not recognised";

// Pure. Invalid takes precedence over Incomplete.
CompletionState validate_draft(const TransferDraft& draft, const BankDirectory& directory,
                               const IdentifierRules& rules = IdentifierRules::defaults());

// Payment state a session carries between turns.
class PaymentSessionState {
 public:
  std::optional<TransferDraft> draft;
  // Drafts waiting for the user to pick one (multiple-transfer request).
  std::vector<TransferDraft> choices;
  // Transaction currently awaiting a decision, if any.
  std::optional<std::string> pending_tx_id;

  void clear() {
    draft.reset();
    choices.clear();
    pending_tx_id.reset();
  }
};

// Selects one of the retained drafts from a follow-up such as "the first
// one", "2", "the last" or a recipient name.
std::optional<std::size_t> select_choice(std::string_view reply,
                                         const std::vector<TransferDraft>& choices);

// Multiple drafts become AwaitingDisambiguation with a "which first"
// message; a single draft passes through unchanged.
PaymentAgentResult resolve_multiple(PaymentAgentResult result);

inline constexpr std::string_view kDisambiguationMessage =
    "I can only process one transfer at a time. Which transfer would you like to process first?";

class OcrEngine {
 public:
  virtual ~OcrEngine() = default;
  // Throws Error(kOcrUnavailable).
  virtual std::string transcribe(const AttachmentRef& attachment) const = 0;
};

// Transcriptions keyed by attachment id.
class FixtureOcr : public OcrEngine {
 public:
  FixtureOcr() = default;
  explicit FixtureOcr(std::map<std::string, std::string> transcriptions)
      : transcriptions_(std::move(transcriptions)) {}
  static FixtureOcr load_file(const std::string& path);

  std::string transcribe(const AttachmentRef& attachment) const override;

 private:
  std::map<std::string, std::string> transcriptions_;
};

inline constexpr std::string_view kOcrUnavailableMessage =
    "I couldn't read the details from that image. Could you type the transfer details instead?";

struct PaymentTurnResult {
  PaymentAgentResult result;
  CompletionState state;
  std::optional<PendingTransaction> pending;
  std::optional<PrecheckFailure> precheck_failure;
  std::vector<ModelCallRecord> calls;
};

class PaymentAgent : public ActionHandler {
 public:
  PaymentAgent(std::shared_ptr<ModelBackend> backend, AdapterSpec spec,
               std::shared_ptr<const BankDirectory> directory,
               std::shared_ptr<const IdentifierRules> rules, std::shared_ptr<const OcrEngine> ocr,
               std::shared_ptr<Bank> bank);

  // Raw extraction plus normalization: bank aliases canonicalized, invalid
  // banks and non-positive amounts nulled with an explanation. Model failure
  // yields an apology and no transfers.
  PaymentAgentResult extract_fields(const ChatTurn& turn, const std::vector<ChatTurn>& history,
                                    const std::optional<std::string>& ocr_text,
                                    std::optional<ModelCallRecord>* call = nullptr);

  std::string ocr_extract(const AttachmentRef& attachment) const;

  // Pre-checks and parks the transaction. Requires a ready draft.
  PendingTransaction submit_for_execution(const TransferDraft& draft,
                                          const std::string& session_id,
                                          const std::string& account_id);

  // Full turn: OCR, extraction, merge with session state, disambiguation,
  // validation and, when ready, submission.
  PaymentTurnResult process_turn(const PipelineEnvelope& envelope, PaymentSessionState& state);

  ActionOutput handle(PipelineEnvelope& envelope) override;

  const BankDirectory& directory() const { return *directory_; }
  const IdentifierRules& rules() const { return *rules_; }

 private:
  std::shared_ptr<ModelBackend> backend_;
  AdapterSpec spec_;
  std::shared_ptr<const BankDirectory> directory_;
  std::shared_ptr<const IdentifierRules> rules_;
  std::shared_ptr<const OcrEngine> ocr_;
  std::shared_ptr<Bank> bank_;
};

// User-facing text for a draft that is ready to confirm.
std::string confirmation_prompt(const TransferDraft& draft, bool requires_2fa);

}  // namespace tellerflow
