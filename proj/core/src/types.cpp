#include "tellerflow/types.h"

#include <array>
#include <cstdio>
#include <ctime>

#include "tellerflow/errors.h"

namespace tellerflow {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInputRejected: return "InputRejected";
    case ErrorCode::kUnknownType: return "UnknownType";
    case ErrorCode::kMissingBinding: return "MissingBinding";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kAgentFailure: return "AgentFailure";
    case ErrorCode::kUnroutableIntent: return "UnroutableIntent";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kEmptyStore: return "EmptyStore";
    case ErrorCode::kOcrUnavailable: return "OcrUnavailable";
    case ErrorCode::kUnknownAccount: return "UnknownAccount";
    case ErrorCode::kUnknownTransaction: return "UnknownTransaction";
    case ErrorCode::kInsufficientFunds: return "InsufficientFunds";
    case ErrorCode::kLimitExceeded: return "LimitExceeded";
    case ErrorCode::kAmlFlagged: return "AmlFlagged";
    case ErrorCode::kTwoFaRequired: return "TwoFaRequired";
    case ErrorCode::kInvalidState: return "InvalidState";
    case ErrorCode::kStaleEdit: return "StaleEdit";
    case ErrorCode::kUnknownSession: return "UnknownSession";
    case ErrorCode::kPipelineBusy: return "PipelineBusy";
    case ErrorCode::kAuthFailure: return "AuthFailure";
    case ErrorCode::kFileUnreadable: return "FileUnreadable";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

ChatTurn ChatTurn::user(std::string text, std::vector<AttachmentRef> attachments) {
  return ChatTurn{Role::kUser, std::move(text), std::move(attachments), Clock::now()};
}

ChatTurn ChatTurn::assistant(std::string text) {
  return ChatTurn{Role::kAssistant, std::move(text), {}, Clock::now()};
}

bool is_alternating_history(const std::vector<ChatTurn>& history) {
  for (std::size_t i = 0; i < history.size(); ++i) {
    Role expected = i % 2 == 0 ? Role::kUser : Role::kAssistant;
    if (history[i].role != expected) return false;
  }
  return true;
}

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table,
                        std::string_view name) {
  for (const auto& [value, label] : table) {
    if (label == name) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view label_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [v, label] : table) {
    if (v == value) return label;
  }
  return "?";
}

constexpr std::array<std::pair<Language, std::string_view>, 4> kLanguages{{
    {Language::kEN, "EN"},
    {Language::kMS, "MS"},
    {Language::kZH, "ZH"},
    {Language::kAuto, "auto"},
}};

constexpr std::array<std::pair<Stage, std::string_view>, 4> kStages{{
    {Stage::kGuardrails, "Guardrails"},
    {Stage::kIntent, "Intent"},
    {Stage::kAction, "Action"},
    {Stage::kConfirmation, "Confirmation"},
}};

constexpr std::array<std::pair<ViolationCategory, std::string_view>, kViolationCategoryCount>
    kViolations{{
        {ViolationCategory::kCodeInterpreterAbuse, "Code Interpreter Abuse"},
        {ViolationCategory::kViolentCrimes, "Violent Crimes"},
        {ViolationCategory::kNonViolentCrimes, "Non-Violent Crimes"},
        {ViolationCategory::kSexRelatedCrimes, "Sex-Related Crimes"},
        {ViolationCategory::kDefamationMisinformationUnethical,
         "Defamation, Misinformation, Unethical"},
        {ViolationCategory::kPrivacy, "Privacy"},
        {ViolationCategory::kControversialTopicsPolitics, "Controversial Topics, Politics"},
        {ViolationCategory::kHate, "Hate"},
    }};

constexpr std::array<std::pair<IntentCategory, std::string_view>, kIntentCategoryCount> kIntents{{
    {IntentCategory::kPayment, "PAYMENT"},
    {IntentCategory::kHistoryInquiry, "HISTORY_INQUIRY"},
    {IntentCategory::kAccountInquiry, "ACCOUNT_INQUIRY"},
    {IntentCategory::kInsight, "INSIGHT"},
    {IntentCategory::kFaq, "FAQ"},
    {IntentCategory::kChat, "CHAT"},
}};

constexpr std::array<std::pair<TransferKind, std::string_view>, 2> kKinds{{
    {TransferKind::kP2P, "P2P"},
    {TransferKind::kP2M, "P2M"},
}};

}  // namespace

std::string_view language_name(Language language) { return label_of(kLanguages, language); }
std::optional<Language> parse_language(std::string_view name) { return lookup(kLanguages, name); }

std::string_view stage_name(Stage stage) { return label_of(kStages, stage); }
std::optional<Stage> parse_stage(std::string_view name) { return lookup(kStages, name); }

std::string_view violation_label(ViolationCategory category) {
  return label_of(kViolations, category);
}
std::optional<ViolationCategory> parse_violation(std::string_view label) {
  return lookup(kViolations, label);
}

std::string_view intent_name(IntentCategory intent) { return label_of(kIntents, intent); }
std::optional<IntentCategory> parse_intent(std::string_view name) { return lookup(kIntents, name); }

std::string_view transfer_kind_name(TransferKind kind) { return label_of(kKinds, kind); }
std::optional<TransferKind> parse_transfer_kind(std::string_view name) {
  return lookup(kKinds, name);
}

bool GuardrailVerdict::well_formed() const {
  if (is_safe) return !violation.has_value();
  return violation.has_value() && message.has_value() && !message->empty();
}

bool IntentResult::well_formed() const {
  if (clarification_needed) return message.has_value() && !message->empty();
  return !message.has_value();
}

std::string_view schema_of(const AgentOutput& output) {
  switch (output.index()) {
    case 0: return kSchemaGuardrailVerdict;
    case 1: return kSchemaIntentResult;
    case 2: return kSchemaPaymentResult;
    case 3: return kSchemaFaqAnswer;
    case 4: return kSchemaInquiryResult;
    default: return kSchemaConfirmation;
  }
}

}  // namespace tellerflow

namespace tellerflow {

std::string format_utc(Timestamp t) {
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  std::time_t secs = static_cast<std::time_t>(ms / 1000);
  if (ms % 1000 < 0) --secs;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(((ms % 1000) + 1000) % 1000));
  return buf;
}

}  // namespace tellerflow
