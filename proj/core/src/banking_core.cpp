#include "tellerflow/banking_core.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"
#include "tellerflow/text.h"

namespace tellerflow {

std::string transaction_record_to_json_line(const TransactionRecord& r) {
  Json j{{"txId", r.tx_id},
         {"accountId", r.account_id},
         {"recipientName", r.recipient_name},
         {"bankName", r.bank_name},
         {"accountNumber", r.account_number},
         {"amount", r.amount.minor()},
         {"reference", r.reference},
         {"kind", std::string(transfer_kind_name(r.kind))},
         {"executedAt", format_utc(r.executed_at)}};
  return write_canonical_json(j);
}

std::string_view tx_state_name(TxState state) {
  switch (state) {
    case TxState::kAwaitingDecision: return "AwaitingDecision";
    case TxState::kApproved: return "Approved";
    case TxState::kDeclined: return "Declined";
    case TxState::kEdited: return "Edited";
    case TxState::kExecuted: return "Executed";
    case TxState::kFailed: return "Failed";
  }
  return "?";
}

bool is_terminal(TxState state) {
  return state == TxState::kDeclined || state == TxState::kExecuted || state == TxState::kFailed;
}

bool is_allowed_transition(TxState from, TxState to) {
  switch (from) {
    case TxState::kAwaitingDecision:
      return to == TxState::kApproved || to == TxState::kDeclined || to == TxState::kEdited;
    case TxState::kEdited: return to == TxState::kAwaitingDecision;
    case TxState::kApproved: return to == TxState::kExecuted || to == TxState::kFailed;
    default: return false;
  }
}

bool requires_2fa(Money amount, TransferKind kind, Money daily_outflow, const TwoFaPolicy& policy) {
  if (amount > policy.threshold) return true;
  return kind == TransferKind::kP2P && daily_outflow + amount > policy.threshold;
}

bool requires_2fa(const TransferDraft& draft, TransferKind kind, const Account& account,
                  const TwoFaPolicy& policy) {
  return requires_2fa(draft.amount.value_or(Money{}), kind, account.daily_outflow, policy);
}

namespace {

std::string identifier_key(std::string_view id) {
  std::string out;
  for (char c : id) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) out.push_back(static_cast<char>(std::toupper(u)));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

bool AmlList::flags(const TransferDraft& draft) const {
  if (draft.account_number && identifiers.count(identifier_key(*draft.account_number))) return true;
  return draft.recipient_name && names.count(text::normalize(*draft.recipient_name));
}

AmlList AmlList::parse(std::string_view json_text) {
  Json doc = Json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kConfigError, "AML list must be a JSON object");
  }
  AmlList list;
  for (const auto& id : doc.value("identifiers", Json::array())) {
    list.identifiers.insert(identifier_key(id.get<std::string>()));
  }
  for (const auto& name : doc.value("names", Json::array())) {
    list.names.insert(text::normalize(name.get<std::string>()));
  }
  return list;
}

AmlList AmlList::load_file(const std::string& path) { return parse(read_file(path)); }

std::string_view precheck_failure_name(PrecheckFailure failure) {
  switch (failure) {
    case PrecheckFailure::kInsufficientFunds: return "InsufficientFunds";
    case PrecheckFailure::kLimitExceeded: return "LimitExceeded";
    case PrecheckFailure::kAmlFlagged: return "AmlFlagged";
  }
  return "?";
}

PrecheckResult precheck(const TransferDraft& draft, const Account& account, const AmlList& aml,
                        const TransferLimits& limits) {
  Money amount = draft.amount.value_or(Money{});
  if (aml.flags(draft)) return {PrecheckFailure::kAmlFlagged, "counterparty is on the watch list"};
  if (amount > limits.per_transaction) {
    return {PrecheckFailure::kLimitExceeded,
            "amount exceeds the per-transaction limit of " + limits.per_transaction.to_display_string()};
  }
  if (account.daily_outflow + amount > limits.daily) {
    return {PrecheckFailure::kLimitExceeded,
            "amount exceeds the daily limit of " + limits.daily.to_display_string()};
  }
  if (amount > account.balance) return {PrecheckFailure::kInsufficientFunds, "insufficient funds"};
  return {};
}

std::optional<DecisionKind> parse_decision_kind(std::string_view name) {
  std::string n = text::to_lower(name);
  if (n == "approve") return DecisionKind::kApprove;
  if (n == "decline") return DecisionKind::kDecline;
  if (n == "edit") return DecisionKind::kEdit;
  return std::nullopt;
}

OneTimeCodes::OneTimeCodes(std::uint64_t seed) : rng_(seed) {}

std::string OneTimeCodes::issue(const std::string& session_id, const std::string& tx_id) {
  std::lock_guard lock(mu_);
  std::uniform_int_distribution<int> dist(0, 999999);
  char buf[8];
  std::snprintf(buf, sizeof buf, "%06d", dist(rng_));
  codes_[{session_id, tx_id}] = buf;
  last_[session_id] = buf;
  return buf;
}

bool OneTimeCodes::verify(const std::string& session_id, const std::string& tx_id,
                          const std::string& code) {
  std::lock_guard lock(mu_);
  auto it = codes_.find({session_id, tx_id});
  if (it == codes_.end() || it->second != code) return false;
  codes_.erase(it);
  return true;
}

bool OneTimeCodes::outstanding(const std::string& session_id, const std::string& tx_id) const {
  std::lock_guard lock(mu_);
  return codes_.count({session_id, tx_id}) > 0;
}

std::optional<std::string> OneTimeCodes::peek(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = last_.find(session_id);
  if (it == last_.end()) return std::nullopt;
  return it->second;
}

void OneTimeCodes::discard_session(const std::string& session_id) {
  std::lock_guard lock(mu_);
  for (auto it = codes_.begin(); it != codes_.end();) {
    it = it->first.first == session_id ? codes_.erase(it) : std::next(it);
  }
  last_.erase(session_id);
}

Bank::Bank(std::vector<Account> accounts, BankConfig config, std::shared_ptr<AuditLog> audit,
           ClockFn clock)
    : config_(std::move(config)), audit_(std::move(audit)), clock_(std::move(clock)) {
  for (auto& a : accounts) {
    std::string id = a.account_id;
    accounts_.emplace(std::move(id), std::move(a));
  }
}

std::vector<Account> Bank::parse_seed(std::string_view json_text) {
  Json doc = Json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw Error(ErrorCode::kConfigError, "account seed must be a JSON array");
  }
  std::vector<Account> out;
  for (const auto& item : doc) {
    Account a;
    a.account_id = item.at("accountId").get<std::string>();
    a.holder_name = item.value("holderName", "");
    const Json& bal = item.at("balance");
    std::optional<Money> m = bal.is_string() ? Money::parse(bal.get<std::string>())
                                             : std::optional<Money>(Money::from_decimal(bal.get<double>()));
    if (!m) throw Error(ErrorCode::kConfigError, "bad balance for account " + a.account_id);
    a.balance = *m;
    a.status = item.value("status", "active") == "frozen" ? AccountStatus::kFrozen : AccountStatus::kActive;
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Account> Bank::load_seed_file(const std::string& path) { return parse_seed(read_file(path)); }

void Bank::set_edit_validator(EditValidator validator) {
  std::unique_lock lock(mu_);
  edit_validator_ = std::move(validator);
}

std::int64_t Bank::local_day(Timestamp t) const {
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(t.time_since_epoch()).count();
  secs += static_cast<std::int64_t>(config_.utc_offset_minutes) * 60;
  std::int64_t day = secs / 86400;
  if (secs % 86400 < 0) --day;
  return day;
}

Account& Bank::account_locked(const std::string& account_id) {
  auto it = accounts_.find(account_id);
  if (it == accounts_.end()) throw Error(ErrorCode::kUnknownAccount, "unknown account " + account_id);
  return it->second;
}

const Account& Bank::account_locked(const std::string& account_id) const {
  auto it = accounts_.find(account_id);
  if (it == accounts_.end()) throw Error(ErrorCode::kUnknownAccount, "unknown account " + account_id);
  return it->second;
}

void Bank::roll_day_locked(Account& account, Timestamp now) {
  std::int64_t today = local_day(now);
  if (account.outflow_day != today) {
    account.outflow_day = today;
    account.daily_outflow = Money{};
  }
}

void Bank::transition_locked(PendingTransaction& tx, TxState to) {
  if (!is_allowed_transition(tx.state, to)) {
    throw Error(ErrorCode::kInvalidState, "transaction " + tx.tx_id + " cannot go from " +
                                              std::string(tx_state_name(tx.state)) + " to " +
                                              std::string(tx_state_name(to)));
  }
  tx.state = to;
  tx.transitions.push_back(to);
}

void Bank::audit_decision(const PendingTransaction& tx, std::string_view kind) {
  if (!audit_) return;
  ConfirmationRequest c{tx.tx_id, tx.draft, tx.kind, tx.requires_2fa, std::string(tx_state_name(tx.state))};
  std::string label(tx_state_name(tx.state));
  if (!tx.reason.empty()) label += ":" + tx.reason;
  audit_->append(tx.session_id, "Confirmation", std::string(kind),
                 text::sha256_hex(canonical_serialize(AgentOutput{c})), label);
}

AccountSummary Bank::query_account(const std::string& account_id) const {
  std::shared_lock lock(mu_);
  const Account& a = account_locked(account_id);
  Money outflow = a.outflow_day == local_day(clock_()) ? a.daily_outflow : Money{};
  return {a.account_id, a.holder_name, a.balance, outflow, a.status};
}

std::vector<TransactionRecord> Bank::query_history(const std::string& account_id, Timestamp from,
                                                   Timestamp to) const {
  std::shared_lock lock(mu_);
  account_locked(account_id);
  std::vector<TransactionRecord> out;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->account_id == account_id && it->executed_at >= from && it->executed_at < to) {
      out.push_back(*it);
    }
  }
  return out;
}

std::vector<TransactionRecord> Bank::query_history(const std::string& account_id) const {
  return query_history(account_id, Timestamp::min(), Timestamp::max());
}

bool Bank::has_account(const std::string& account_id) const {
  std::shared_lock lock(mu_);
  return accounts_.count(account_id) > 0;
}

std::vector<std::string> Bank::account_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, a] : accounts_) ids.push_back(id);
  return ids;
}

namespace {

ErrorCode code_for(PrecheckFailure f) {
  switch (f) {
    case PrecheckFailure::kInsufficientFunds: return ErrorCode::kInsufficientFunds;
    case PrecheckFailure::kLimitExceeded: return ErrorCode::kLimitExceeded;
    case PrecheckFailure::kAmlFlagged: return ErrorCode::kAmlFlagged;
  }
  return ErrorCode::kInvalidState;
}

}  // namespace

PendingTransaction Bank::create_pending(const std::string& session_id, const std::string& account_id,
                                        const TransferDraft& draft, TransferKind kind) {
  if (!draft.complete() || draft.amount->minor() <= 0) {
    throw Error(ErrorCode::kInvalidState, "draft is not ready for confirmation");
  }
  PendingTransaction tx;
  {
    std::unique_lock lock(mu_);
    Account& account = account_locked(account_id);
    roll_day_locked(account, clock_());
    auto check = precheck(draft, account, config_.aml, config_.limits);
    if (!check.pass()) throw Error(code_for(*check.failure), check.detail);

    char id[32];
    std::snprintf(id, sizeof id, "tx-%06llu", static_cast<unsigned long long>(next_tx_++));
    tx.tx_id = id;
    tx.session_id = session_id;
    tx.account_id = account_id;
    tx.draft = draft;
    tx.kind = kind;
    tx.requires_2fa = requires_2fa(draft, kind, account, config_.two_fa);
    tx.transitions.push_back(TxState::kAwaitingDecision);
    pending_[tx.tx_id] = tx;
  }
  if (tx.requires_2fa) codes_.issue(session_id, tx.tx_id);
  audit_decision(tx, "pending_created");
  return tx;
}

PendingTransaction Bank::decide(const std::string& tx_id, const Decision& decision,
                                const std::optional<std::string>& second_factor) {
  PendingTransaction snapshot;
  std::string audit_kind;
  {
    std::unique_lock lock(mu_);
    auto it = pending_.find(tx_id);
    if (it == pending_.end()) throw Error(ErrorCode::kUnknownTransaction, "unknown transaction " + tx_id);
    PendingTransaction& tx = it->second;
    if (tx.state != TxState::kAwaitingDecision) {
      throw Error(ErrorCode::kInvalidState, "transaction " + tx_id + " is " +
                                                std::string(tx_state_name(tx.state)));
    }

    switch (decision.kind) {
      case DecisionKind::kDecline:
        transition_locked(tx, TxState::kDeclined);
        audit_kind = "declined";
        break;

      case DecisionKind::kEdit: {
        if (!decision.edited) throw Error(ErrorCode::kStaleEdit, "edit carries no draft");
        const TransferDraft& edited = *decision.edited;
        if (edit_validator_) {
          if (auto err = edit_validator_(edited)) throw Error(ErrorCode::kStaleEdit, *err);
        } else if (!edited.complete() || edited.amount->minor() <= 0) {
          throw Error(ErrorCode::kStaleEdit, "edited draft is incomplete");
        }
        Account& account = account_locked(tx.account_id);
        roll_day_locked(account, clock_());
        auto check = precheck(edited, account, config_.aml, config_.limits);
        if (!check.pass()) throw Error(code_for(*check.failure), check.detail);
        transition_locked(tx, TxState::kEdited);
        tx.draft = edited;
        tx.requires_2fa = requires_2fa(edited, tx.kind, account, config_.two_fa);
        transition_locked(tx, TxState::kAwaitingDecision);
        audit_kind = "edited";
        break;
      }

      case DecisionKind::kApprove: {
        Account& account = account_locked(tx.account_id);
        Timestamp now = clock_();
        roll_day_locked(account, now);
        tx.requires_2fa = requires_2fa(tx.draft, tx.kind, account, config_.two_fa);
        if (tx.requires_2fa) {
          bool ok = second_factor && codes_.verify(tx.session_id, tx.tx_id, *second_factor);
          if (!ok) {
            if (!codes_.outstanding(tx.session_id, tx.tx_id)) codes_.issue(tx.session_id, tx.tx_id);
            throw Error(ErrorCode::kTwoFaRequired, "a valid one-time code is required");
          }
        }
        transition_locked(tx, TxState::kApproved);
        auto check = precheck(tx.draft, account, config_.aml, config_.limits);
        if (!check.pass()) {
          tx.reason = std::string(precheck_failure_name(*check.failure));
          transition_locked(tx, TxState::kFailed);
          audit_kind = "failed";
          break;
        }
        Money amount = *tx.draft.amount;
        account.balance -= amount;
        account.daily_outflow += amount;
        external_sink_ += amount;
        records_.push_back({tx.tx_id, tx.account_id, *tx.draft.recipient_name, *tx.draft.bank_name,
                            *tx.draft.account_number, amount, tx.draft.reference, tx.kind, now});
        transition_locked(tx, TxState::kExecuted);
        audit_kind = "executed";
        break;
      }
    }
    snapshot = tx;
  }
  if (decision.kind == DecisionKind::kEdit && snapshot.requires_2fa) {
    codes_.issue(snapshot.session_id, snapshot.tx_id);
  }
  audit_decision(snapshot, audit_kind);
  return snapshot;
}

std::optional<PendingTransaction> Bank::expire(const std::string& tx_id) {
  PendingTransaction snapshot;
  {
    std::unique_lock lock(mu_);
    auto it = pending_.find(tx_id);
    if (it == pending_.end() || it->second.state != TxState::kAwaitingDecision) return std::nullopt;
    it->second.reason = "expired";
    transition_locked(it->second, TxState::kDeclined);
    snapshot = it->second;
  }
  audit_decision(snapshot, "expired");
  return snapshot;
}

PendingTransaction Bank::transaction(const std::string& tx_id) const {
  std::shared_lock lock(mu_);
  auto it = pending_.find(tx_id);
  if (it == pending_.end()) throw Error(ErrorCode::kUnknownTransaction, "unknown transaction " + tx_id);
  return it->second;
}

Money Bank::total_balances() const {
  std::shared_lock lock(mu_);
  Money total;
  for (const auto& [id, a] : accounts_) total += a.balance;
  return total;
}

Money Bank::external_sink_total() const {
  std::shared_lock lock(mu_);
  return external_sink_;
}

std::size_t Bank::executed_count() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

void Bank::export_records(std::ostream& out) const {
  std::shared_lock lock(mu_);
  for (const auto& r : records_) out << transaction_record_to_json_line(r) << '\n';
}

}  // namespace tellerflow
