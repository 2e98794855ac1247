#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tellerflow/money.h"

namespace tellerflow {

using Clock = std::chrono::system_clock;
using Timestamp = Clock::time_point;

// ISO-8601 UTC with milliseconds, e.g. "2026-01-02T03:04:05.678Z".
std::string format_utc(Timestamp t);

enum class Role { kUser, kAssistant };

// Handle to an uploaded image. `content` holds the decoded payload bytes; an
// empty payload is treated as undecodable.
struct AttachmentRef {
  std::string id;
  std::string content;

  bool operator==(const AttachmentRef&) const = default;
};

struct ChatTurn {
  Role role = Role::kUser;
  std::string text;
  std::vector<AttachmentRef> attachments;
  Timestamp timestamp{};

  static ChatTurn user(std::string text, std::vector<AttachmentRef> attachments = {});
  static ChatTurn assistant(std::string text);
};

// True when roles strictly alternate starting with a user turn.
bool is_alternating_history(const std::vector<ChatTurn>& history);

enum class Language { kEN, kMS, kZH, kAuto };
std::string_view language_name(Language language);
std::optional<Language> parse_language(std::string_view name);

enum class Stage { kGuardrails, kIntent, kAction, kConfirmation };
std::string_view stage_name(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

// Guardrail categories. Sex-related crimes is its own category even though
// the prompt numbering collides with non-violent crimes.
enum class ViolationCategory {
  kCodeInterpreterAbuse,
  kViolentCrimes,
  kNonViolentCrimes,
  kSexRelatedCrimes,
  kDefamationMisinformationUnethical,
  kPrivacy,
  kControversialTopicsPolitics,
  kHate,
};
inline constexpr int kViolationCategoryCount = 8;
// Display labels, e.g. "Code Interpreter Abuse".
std::string_view violation_label(ViolationCategory category);
std::optional<ViolationCategory> parse_violation(std::string_view label);

enum class IntentCategory {
  kPayment,
  kHistoryInquiry,
  kAccountInquiry,
  kInsight,
  kFaq,
  kChat,
};
inline constexpr int kIntentCategoryCount = 6;
std::string_view intent_name(IntentCategory intent);
std::optional<IntentCategory> parse_intent(std::string_view name);

struct GuardrailVerdict {
  bool is_safe = true;
  std::optional<ViolationCategory> violation;
  std::optional<std::string> message;

  bool well_formed() const;
  bool operator==(const GuardrailVerdict&) const = default;
};

struct IntentResult {
  IntentCategory intent = IntentCategory::kChat;
  bool clarification_needed = false;
  std::optional<std::string> message;

  bool well_formed() const;
  bool operator==(const IntentResult&) const = default;
};

inline constexpr std::string_view kDefaultReference = "Funds Transfer";

struct TransferDraft {
  std::optional<std::string> recipient_name;
  std::optional<std::string> bank_name;
  std::optional<std::string> account_number;
  std::optional<Money> amount;
  std::string reference{kDefaultReference};

  bool complete() const {
    return recipient_name && bank_name && account_number && amount && !reference.empty();
  }
  bool operator==(const TransferDraft&) const = default;
};

struct PaymentAgentResult {
  std::vector<TransferDraft> transfers;
  std::string message;

  bool operator==(const PaymentAgentResult&) const = default;
};

struct FaqAnswer {
  std::string message;

  bool operator==(const FaqAnswer&) const = default;
};

// Output of the deterministic handlers (balance, history, insight, small
// talk). `kind` names the handler, `fields` carries its display values.
struct InquiryResult {
  std::string kind;
  std::string message;
  std::vector<std::pair<std::string, std::string>> fields;

  bool operator==(const InquiryResult&) const = default;
};

enum class TransferKind { kP2P, kP2M };
std::string_view transfer_kind_name(TransferKind kind);
std::optional<TransferKind> parse_transfer_kind(std::string_view name);

// What the confirmation stage hands to the user: the summary of a pending
// transaction awaiting Approve / Decline / Edit.
struct ConfirmationRequest {
  std::string tx_id;
  TransferDraft draft;
  TransferKind kind = TransferKind::kP2P;
  bool requires_2fa = false;
  std::string state;

  bool operator==(const ConfirmationRequest&) const = default;
};

// Closed set of structured outputs that can appear in a stage record.
using AgentOutput = std::variant<GuardrailVerdict, IntentResult, PaymentAgentResult,
                                 FaqAnswer, InquiryResult, ConfirmationRequest>;

// Registered schema names, one per AgentOutput alternative.
inline constexpr std::string_view kSchemaGuardrailVerdict = "guardrail_verdict";
inline constexpr std::string_view kSchemaIntentResult = "intent_result";
inline constexpr std::string_view kSchemaPaymentResult = "payment_result";
inline constexpr std::string_view kSchemaFaqAnswer = "faq_answer";
inline constexpr std::string_view kSchemaInquiryResult = "inquiry_result";
inline constexpr std::string_view kSchemaConfirmation = "confirmation_request";

std::string_view schema_of(const AgentOutput& output);

}  // namespace tellerflow
