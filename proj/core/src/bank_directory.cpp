#include "tellerflow/payment_agent.h"

#include <fstream>
#include <sstream>

#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"
#include "tellerflow/fixture_backend.h"
#include "tellerflow/text.h"

namespace tellerflow {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

BankDirectory::BankDirectory(std::vector<BankEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    by_key_[text::normalize(e.bank_name)] = e.bank_name;
    for (const auto& a : e.aliases) by_key_[text::normalize(a)] = e.bank_name;
  }
}

BankDirectory BankDirectory::parse(std::string_view json_text) {
  Json doc = Json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw Error(ErrorCode::kConfigError, "bank directory must be a JSON array");
  }
  std::vector<BankEntry> entries;
  for (const auto& item : doc) {
    BankEntry e;
    e.bank_name = item.at("bankName").get<std::string>();
    e.aliases = item.value("aliases", std::vector<std::string>{});
    e.routing_code = item.value("routingCode", "");
    entries.push_back(std::move(e));
  }
  return BankDirectory(std::move(entries));
}

BankDirectory BankDirectory::load_file(const std::string& path) { return parse(read_file(path)); }

std::optional<std::string> BankDirectory::canonical(std::string_view name) const {
  auto it = by_key_.find(text::normalize(name));
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

std::string BankDirectory::prompt_listing() const {
  std::vector<std::string> lines;
  for (const auto& e : entries_) lines.push_back(render_bank_list_line(e.bank_name, e.aliases));
  return text::join(lines, "\n");
}

std::string_view identifier_kind_name(IdentifierKind kind) {
  switch (kind) {
    case IdentifierKind::kAccount: return "account";
    case IdentifierKind::kPhone: return "phone";
    case IdentifierKind::kNric: return "nric";
    case IdentifierKind::kBusinessId: return "businessId";
  }
  return "?";
}

void IdentifierRules::add(IdentifierKind kind, const std::string& pattern) {
  try {
    rules_.push_back({kind, pattern, std::regex(pattern)});
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::kConfigError, "bad identifier pattern " + pattern + ": " + e.what());
  }
}

IdentifierRules IdentifierRules::defaults() {
  static const IdentifierRules kDefaults = [] {
    IdentifierRules r;
    r.add(IdentifierKind::kPhone, R"(^(?:\+?60|0)1\d{8,9}$)");
    r.add(IdentifierKind::kNric, R"(^\d{6}-\d{2}-\d{4}$)");
    r.add(IdentifierKind::kBusinessId, R"(^(?:\d{5,8}-[A-Z]|[A-Z]{2,3}\d{6,10})$)");
    r.add(IdentifierKind::kAccount, R"(^\d{6,20}$)");
    return r;
  }();
  return kDefaults;
}

IdentifierRules IdentifierRules::parse(const std::string& json_text) {
  Json doc = Json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw Error(ErrorCode::kConfigError, "identifier rules must be a JSON array");
  }
  IdentifierRules r;
  for (const auto& item : doc) {
    std::string kind = item.at("kind").get<std::string>();
    std::optional<IdentifierKind> k;
    for (auto c : {IdentifierKind::kAccount, IdentifierKind::kPhone, IdentifierKind::kNric,
                   IdentifierKind::kBusinessId}) {
      if (identifier_kind_name(c) == kind) k = c;
    }
    if (!k) throw Error(ErrorCode::kConfigError, "unknown identifier kind " + kind);
    r.add(*k, item.at("pattern").get<std::string>());
  }
  return r;
}

std::optional<IdentifierKind> IdentifierRules::classify(std::string_view identifier) const {
  std::string id = text::trim(identifier);
  for (const auto& rule : rules_) {
    if (std::regex_match(id, rule.compiled)) return rule.kind;
  }
  return std::nullopt;
}

TransferKind transfer_kind_for(std::optional<IdentifierKind> kind) {
  return kind == IdentifierKind::kBusinessId ? TransferKind::kP2M : TransferKind::kP2P;
}

std::string completion_state_label(const CompletionState& state) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Incomplete>) return "Incomplete";
        if constexpr (std::is_same_v<T, Invalid>) return "Invalid";
        if constexpr (std::is_same_v<T, AwaitingDisambiguation>) return "AwaitingDisambiguation";
        return "ReadyForConfirmation";
      },
      state);
}

CompletionState validate_draft(const TransferDraft& draft, const BankDirectory& directory,
                               const IdentifierRules& rules) {
  Invalid invalid;
  if (draft.amount && draft.amount->minor() <= 0) invalid.field_errors["amount"] = kAmountError;
  if (draft.bank_name && !directory.contains(*draft.bank_name)) {
    invalid.field_errors["bankName"] = kBankError;
  }
  if (draft.account_number && !rules.classify(*draft.account_number)) {
    invalid.field_errors["accountNumber"] = kIdentifierError;
  }
  if (!invalid.field_errors.empty()) return invalid;

  Incomplete incomplete;
  if (!draft.recipient_name) incomplete.missing_fields.push_back("recipientName");
  if (!draft.bank_name) incomplete.missing_fields.push_back("bankName");
  if (!draft.account_number) incomplete.missing_fields.push_back("accountNumber");
  if (!draft.amount) incomplete.missing_fields.push_back("amount");
  if (draft.reference.empty()) incomplete.missing_fields.push_back("reference");
  if (!incomplete.missing_fields.empty()) return incomplete;
  return ReadyForConfirmation{};
}

std::optional<std::size_t> select_choice(std::string_view reply,
                                         const std::vector<TransferDraft>& choices) {
  if (choices.empty()) return std::nullopt;
  auto w = text::words(reply);
  auto has = [&](std::string_view x) { return std::find(w.begin(), w.end(), x) != w.end(); };
  if (has("first") || has("1") || has("pertama")) return 0;
  if ((has("second") || has("2") || has("kedua")) && choices.size() >= 2) return 1;
  if ((has("third") || has("3")) && choices.size() >= 3) return 2;
  if (has("last")) return choices.size() - 1;
  std::string n = text::normalize(reply);
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (choices[i].recipient_name &&
        text::contains_phrase(n, text::normalize(*choices[i].recipient_name))) {
      if (found) return std::nullopt;
      found = i;
    }
  }
  return found;
}

PaymentAgentResult resolve_multiple(PaymentAgentResult result) {
  if (result.transfers.size() <= 1) return result;
  std::string msg(kDisambiguationMessage);
  for (std::size_t i = 0; i < result.transfers.size(); ++i) {
    const auto& d = result.transfers[i];
    msg += "\n" + std::to_string(i + 1) + ". " +
           (d.amount ? d.amount->to_display_string() : std::string("(amount not given)")) + " to " +
           d.recipient_name.value_or("(recipient not given)");
  }
  result.message = std::move(msg);
  return result;
}

FixtureOcr FixtureOcr::load_file(const std::string& path) {
  Json doc = Json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kConfigError, "OCR fixtures must be a JSON object");
  }
  const Json& table = doc.contains("transcriptions") ? doc["transcriptions"] : doc;
  std::map<std::string, std::string> out;
  for (auto it = table.begin(); it != table.end(); ++it) {
    const Json& v = it.value();
    if (v.is_array()) {
      std::vector<std::string> lines = v.get<std::vector<std::string>>();
      out[it.key()] = text::join(lines, "\n");
    } else {
      out[it.key()] = v.get<std::string>();
    }
  }
  return FixtureOcr(std::move(out));
}

std::string FixtureOcr::transcribe(const AttachmentRef& attachment) const {
  auto it = transcriptions_.find(attachment.id);
  if (it == transcriptions_.end()) {
    throw Error(ErrorCode::kOcrUnavailable, "no text could be read from " + attachment.id);
  }
  return it->second;
}

}  // namespace tellerflow
