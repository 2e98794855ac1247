#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "tellerflow/audit.h"
#include "tellerflow/money.h"
#include "tellerflow/types.h"

namespace tellerflow {

enum class AccountStatus { kActive, kFrozen };

struct Account {
  std::string account_id;
  std::string holder_name;
  Money balance;
  // Sum of executed debits on `outflow_day` (local calendar day number).
  Money daily_outflow;
  std::int64_t outflow_day = 0;
  AccountStatus status = AccountStatus::kActive;
};

struct AccountSummary {
  std::string account_id;
  std::string holder_name;
  Money available_balance;
  Money daily_outflow;
  AccountStatus status = AccountStatus::kActive;
};

struct TransactionRecord {
  std::string tx_id;
  std::string account_id;
  std::string recipient_name;
  std::string bank_name;
  std::string account_number;
  Money amount;
  std::string reference;
  TransferKind kind = TransferKind::kP2P;
  Timestamp executed_at{};
};

std::string transaction_record_to_json_line(const TransactionRecord& record);

enum class TxState { kAwaitingDecision, kApproved, kDeclined, kEdited, kExecuted, kFailed };
std::string_view tx_state_name(TxState state);

// Declared edge set; terminal states (Declined, Executed, Failed) absorb.
bool is_allowed_transition(TxState from, TxState to);
bool is_terminal(TxState state);

struct PendingTransaction {
  std::string tx_id;
  std::string session_id;
  std::string account_id;
  TransferDraft draft;
  TransferKind kind = TransferKind::kP2P;
  bool requires_2fa = false;
  TxState state = TxState::kAwaitingDecision;
  // Failure reason, or "expired" for a decline forced by session close.
  std::string reason;
  std::vector<TxState> transitions;
};

struct TwoFaPolicy {
  // Strictly-greater comparison: exactly the threshold needs one confirmation.
  Money threshold = Money::from_minor(25000);
};

// P2P: amount or today's cumulative outflow plus amount above threshold.
// P2M: amount above threshold; cumulative outflow is ignored.
bool requires_2fa(Money amount, TransferKind kind, Money daily_outflow, const TwoFaPolicy& policy);
bool requires_2fa(const TransferDraft& draft, TransferKind kind, const Account& account,
                  const TwoFaPolicy& policy);

struct TransferLimits {
  Money per_transaction = Money::from_major(10000);
  Money daily = Money::from_major(20000);
};

// Watch list of counterparty identifiers (digits/letters only, upper-cased)
// and names (normalized).
struct AmlList {
  std::set<std::string> identifiers;
  std::set<std::string> names;

  bool flags(const TransferDraft& draft) const;
  static AmlList load_file(const std::string& path);
  static AmlList parse(std::string_view json_text);
};

enum class PrecheckFailure { kInsufficientFunds, kLimitExceeded, kAmlFlagged };
std::string_view precheck_failure_name(PrecheckFailure failure);

struct PrecheckResult {
  std::optional<PrecheckFailure> failure;
  std::string detail;

  bool pass() const { return !failure.has_value(); }
};

// Order of checks: AML, per-transaction cap, daily cap, balance.
PrecheckResult precheck(const TransferDraft& draft, const Account& account, const AmlList& aml,
                        const TransferLimits& limits);

enum class DecisionKind { kApprove, kDecline, kEdit };
std::optional<DecisionKind> parse_decision_kind(std::string_view name);

struct Decision {
  DecisionKind kind = DecisionKind::kDecline;
  // For edits: the full replacement draft (already merged with the fields
  // the user changed).
  std::optional<TransferDraft> edited;
};

// Simulated second factor: a one-time numeric code per (session, tx).
class OneTimeCodes {
 public:
  explicit OneTimeCodes(std::uint64_t seed = std::random_device{}());

  std::string issue(const std::string& session_id, const std::string& tx_id);
  // Consumes the code on success.
  bool verify(const std::string& session_id, const std::string& tx_id, const std::string& code);
  bool outstanding(const std::string& session_id, const std::string& tx_id) const;
  // The "delivery channel" in dev/test: last code issued for a session.
  std::optional<std::string> peek(const std::string& session_id) const;
  void discard_session(const std::string& session_id);

 private:
  mutable std::mutex mu_;
  std::mt19937_64 rng_;
  std::map<std::pair<std::string, std::string>, std::string> codes_;
  std::map<std::string, std::string> last_;
};

struct BankConfig {
  TwoFaPolicy two_fa;
  TransferLimits limits;
  AmlList aml;
  // Day boundary for cumulative outflow, minutes east of UTC (UTC+8).
  int utc_offset_minutes = 8 * 60;
};

// Re-runs payment validation on an edited draft; returns an error text when
// the draft is not ready for confirmation.
using EditValidator = std::function<std::optional<std::string>(const TransferDraft&)>;

class Bank {
 public:
  using ClockFn = std::function<Timestamp()>;

  Bank(std::vector<Account> accounts, BankConfig config, std::shared_ptr<AuditLog> audit,
       ClockFn clock = [] { return Clock::now(); });

  // [{"accountId", "holderName", "balance": "1000.00" | 1000.00, "status"}].
  static std::vector<Account> load_seed_file(const std::string& path);
  static std::vector<Account> parse_seed(std::string_view json_text);

  void set_edit_validator(EditValidator validator);

  AccountSummary query_account(const std::string& account_id) const;
  // Records with from <= executed_at < to, newest first.
  std::vector<TransactionRecord> query_history(const std::string& account_id, Timestamp from,
                                               Timestamp to) const;
  std::vector<TransactionRecord> query_history(const std::string& account_id) const;

  bool has_account(const std::string& account_id) const;
  std::vector<std::string> account_ids() const;

  // Runs the pre-execution checks and parks the transfer for the user's
  // decision. Never touches balances. Throws Error(kInsufficientFunds /
  // kLimitExceeded / kAmlFlagged / kUnknownAccount).
  PendingTransaction create_pending(const std::string& session_id, const std::string& account_id,
                                    const TransferDraft& draft, TransferKind kind);

  // Approve executes atomically; decline and edit never move money.
  // Throws Error(kTwoFaRequired) leaving the transaction untouched,
  // Error(kInvalidState), Error(kStaleEdit), Error(kUnknownTransaction).
  PendingTransaction decide(const std::string& tx_id, const Decision& decision,
                            const std::optional<std::string>& second_factor);

  // Forced decline (session closed or expired) of a still-open transaction.
  std::optional<PendingTransaction> expire(const std::string& tx_id);

  PendingTransaction transaction(const std::string& tx_id) const;

  Money total_balances() const;
  Money external_sink_total() const;
  std::size_t executed_count() const;

  void export_records(std::ostream& out) const;

  OneTimeCodes& codes() { return codes_; }
  const BankConfig& config() const { return config_; }

 private:
  std::int64_t local_day(Timestamp t) const;
  Account& account_locked(const std::string& account_id);
  const Account& account_locked(const std::string& account_id) const;
  void roll_day_locked(Account& account, Timestamp now);
  void transition_locked(PendingTransaction& tx, TxState to);
  void audit_decision(const PendingTransaction& tx, std::string_view kind);

  BankConfig config_;
  std::shared_ptr<AuditLog> audit_;
  ClockFn clock_;
  EditValidator edit_validator_;
  OneTimeCodes codes_;

  mutable std::shared_mutex mu_;
  std::map<std::string, Account> accounts_;
  std::map<std::string, PendingTransaction> pending_;
  std::vector<TransactionRecord> records_;
  Money external_sink_;
  std::uint64_t next_tx_ = 1;
};

}  // namespace tellerflow
