#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tellerflow/runtime.h"

namespace tellerflow {

struct Session {
  std::string session_id;
  std::string account_id;
  std::vector<ChatTurn> history;
  PaymentSessionState payment;
  Timestamp created_at{};
  Timestamp last_activity{};
  bool busy = false;
  bool closed = false;
};

struct TransactionPreview {
  ConfirmationRequest request;
  std::vector<std::string> actions{"approve", "decline", "edit"};
};

struct MessageReply {
  std::string session_id;
  std::string reply;
  std::vector<Stage> stage_trace;
  bool clarification = false;
  std::optional<TransactionPreview> preview;
  bool failed = false;
};

struct DecisionResult {
  std::string tx_id;
  TxState state = TxState::kAwaitingDecision;
  std::string reason;
  bool requires_2fa = false;
  std::string message;
  std::optional<TransactionPreview> preview;
  std::optional<Money> balance;
};

// Read-only view of a live session (polling endpoint).
struct SessionView {
  std::string session_id;
  std::string account_id;
  std::vector<ChatTurn> history;
  std::optional<TransactionPreview> preview;
};

// Transport-independent service behind the HTTP API. Session memory exists
// only here; closing (or idling out) a session discards it and declines any
// transaction still waiting on the user. Only redacted audit events persist.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Runtime> runtime, Bank::ClockFn clock = [] { return Clock::now(); });

  std::string open_session(const std::string& account_id);
  void close_session(const std::string& session_id);

  // Throws Error(kUnknownSession), Error(kPipelineBusy), Error(kInputRejected).
  MessageReply post_message(const std::string& session_id, const std::string& text,
                            const std::vector<AttachmentRef>& attachments = {});

  // `edited_fields` uses wire names (recipientName, bankName, accountNumber,
  // amount, reference). Errors from the bank propagate unchanged.
  DecisionResult post_decision(const std::string& session_id, const std::string& tx_id,
                               DecisionKind decision,
                               const std::map<std::string, std::string>& edited_fields = {},
                               const std::optional<std::string>& second_factor = std::nullopt);

  std::optional<SessionView> view(const std::string& session_id);

  // Both throw Error(kAuthFailure) for a bad token and leave state untouched
  // on Error(kParseError). Return the new blocklist / knowledge version.
  std::int64_t admin_reload_blocklist(const std::string& token);
  std::int64_t admin_reload_blocklist(const std::string& token, std::string_view json_text);
  std::int64_t admin_ingest_knowledge(const std::string& token, std::string_view jsonl_text);
  // TransactionRecord export as JSON Lines.
  std::string admin_export_transactions(const std::string& token);

  // Closes every session idle for longer than the configured expiry.
  std::size_t expire_idle();

  // Dev/test delivery channel for the simulated second factor.
  std::optional<std::string> dev_peek_code(const std::string& session_id) const;

  std::size_t open_sessions() const;
  Runtime& runtime() { return *runtime_; }
  bool dev_mode() const { return runtime_->config.dev_mode; }

 private:
  std::shared_ptr<Session> acquire(const std::string& session_id);
  void release(const std::shared_ptr<Session>& session);
  void close_locked(const std::string& session_id, std::string_view why);
  void discard(Session& session, std::string_view why);
  void check_admin(const std::string& token) const;
  std::optional<TransactionPreview> preview_for(const Session& session) const;
  void audit_pipeline(const PipelineEnvelope& envelope);

  std::shared_ptr<Runtime> runtime_;
  Bank::ClockFn clock_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;
  std::string admin_token_;
};

}  // namespace tellerflow
