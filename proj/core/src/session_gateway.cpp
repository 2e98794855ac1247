#include "tellerflow/session_gateway.h"

#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>

#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"
#include "tellerflow/text.h"

namespace tellerflow {

namespace {

std::string random_session_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  std::ostringstream out;
  out << "s-" << std::hex << rng();
  return out.str();
}

std::string stage_label(const StageRecord& rec, const PipelineEnvelope& env) {
  AgentOutput out = parse_canonical(rec.schema_id, rec.verdict_digest);
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GuardrailVerdict>) {
          return v.is_safe ? "safe" : std::string(violation_label(*v.violation));
        } else if constexpr (std::is_same_v<T, IntentResult>) {
          std::string l(intent_name(v.intent));
          return v.clarification_needed ? l + ":clarification" : l;
        } else if constexpr (std::is_same_v<T, PaymentAgentResult>) {
          return "transfers:" + std::to_string(v.transfers.size());
        } else if constexpr (std::is_same_v<T, FaqAnswer>) {
          return env.grounding_doc_ids.empty() ? "fallback" : "grounded";
        } else if constexpr (std::is_same_v<T, InquiryResult>) {
          return v.kind;
        } else {
          return v.state;
        }
      },
      out);
}

std::string decision_message(const PendingTransaction& tx) {
  switch (tx.state) {
    case TxState::kExecuted:
      return "Done! " + tx.draft.amount->to_display_string() + " has been transferred to " +
             *tx.draft.recipient_name + ".";
    case TxState::kDeclined:
      return "The transfer has been cancelled. No money was moved.";
    case TxState::kFailed:
      return "The transfer could not be completed (" + tx.reason + "). No money was moved.";
    default:
      return confirmation_prompt(tx.draft, tx.requires_2fa);
  }
}

}  // namespace

Gateway::Gateway(std::shared_ptr<Runtime> runtime, Bank::ClockFn clock)
    : runtime_(std::move(runtime)), clock_(std::move(clock)) {
  admin_token_ = runtime_->config.admin_token;
  if (admin_token_.empty()) {
    if (const char* env = std::getenv("TELLERFLOW_ADMIN_TOKEN")) admin_token_ = env;
  }
}

std::string Gateway::open_session(const std::string& account_id) {
  if (!runtime_->bank->has_account(account_id)) {
    throw Error(ErrorCode::kUnknownAccount, "unknown account " + account_id);
  }
  auto session = std::make_shared<Session>();
  session->account_id = account_id;
  session->created_at = session->last_activity = clock_();
  {
    std::lock_guard lock(mu_);
    do {
      session->session_id = random_session_id();
    } while (sessions_.count(session->session_id));
    sessions_[session->session_id] = session;
  }
  runtime_->audit->append(session->session_id, "Gateway", "session_opened", "", "open");
  return session->session_id;
}

std::shared_ptr<Session> Gateway::acquire(const std::string& session_id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::kUnknownSession, "unknown session " + session_id);
  if (it->second->busy) {
    throw Error(ErrorCode::kPipelineBusy, "session " + session_id + " is still handling a message");
  }
  it->second->busy = true;
  return it->second;
}

void Gateway::release(const std::shared_ptr<Session>& session) {
  std::lock_guard lock(mu_);
  session->busy = false;
  session->last_activity = clock_();
}

namespace {

struct Lease {
  std::function<void()> done;
  ~Lease() { done(); }
};

}  // namespace

void Gateway::discard(Session& session, std::string_view why) {
  session.closed = true;
  if (session.payment.pending_tx_id) runtime_->bank->expire(*session.payment.pending_tx_id);
  runtime_->bank->codes().discard_session(session.session_id);
  session.history.clear();
  session.payment.clear();
  runtime_->audit->append(session.session_id, "Gateway", "session_closed", "", std::string(why));
}

void Gateway::close_locked(const std::string& session_id, std::string_view why) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::kUnknownSession, "unknown session " + session_id);
  auto session = it->second;
  sessions_.erase(it);
  session->closed = true;
  // A turn still in flight finishes the cleanup itself.
  if (!session->busy) discard(*session, why);
}

void Gateway::close_session(const std::string& session_id) {
  std::lock_guard lock(mu_);
  close_locked(session_id, "closed");
}

std::size_t Gateway::expire_idle() {
  std::lock_guard lock(mu_);
  Timestamp now = clock_();
  std::vector<std::string> idle;
  for (const auto& [id, s] : sessions_) {
    if (!s->busy && now - s->last_activity > runtime_->config.session_idle_expiry) idle.push_back(id);
  }
  for (const auto& id : idle) close_locked(id, "expired");
  return idle.size();
}

std::size_t Gateway::open_sessions() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

std::optional<TransactionPreview> Gateway::preview_for(const Session& session) const {
  if (!session.payment.pending_tx_id) return std::nullopt;
  PendingTransaction tx = runtime_->bank->transaction(*session.payment.pending_tx_id);
  if (tx.state != TxState::kAwaitingDecision) return std::nullopt;
  return TransactionPreview{ConfirmationRequest{tx.tx_id, tx.draft, tx.kind, tx.requires_2fa,
                                                std::string(tx_state_name(tx.state))}};
}

void Gateway::audit_pipeline(const PipelineEnvelope& env) {
  for (const auto& rec : env.stage_trace) {
    runtime_->audit->append(env.session_id, std::string(stage_name(rec.stage)), "stage_completed",
                            text::sha256_hex(rec.verdict_digest), stage_label(rec, env));
  }
  if (env.failure) {
    runtime_->audit->append(env.session_id, std::string(stage_name(env.failure->stage)),
                            "agent_failure", "", "AgentFailure");
  }
}

MessageReply Gateway::post_message(const std::string& session_id, const std::string& text,
                                   const std::vector<AttachmentRef>& attachments) {
  auto session = acquire(session_id);
  Lease lease{[&] {
    release(session);
    bool closed;
    {
      std::lock_guard lock(mu_);
      closed = session->closed;
    }
    if (closed) discard(*session, "closed");
  }};

  PipelineEnvelope env;
  env.session_id = session->session_id;
  env.account_id = session->account_id;
  env.turn = ChatTurn::user(text, attachments);
  env.history = cap_history(session->history, runtime_->config.history_cap);
  env.payment_state = &session->payment;
  env = run_pipeline(std::move(env), runtime_->registry);

  ChatTurn stored = env.turn;
  for (auto& a : stored.attachments) a.content.clear();
  session->history.push_back(std::move(stored));
  session->history.push_back(ChatTurn::assistant(env.final_reply.value_or("")));
  session->history = cap_history(std::move(session->history), runtime_->config.history_cap);
  audit_pipeline(env);

  MessageReply reply;
  reply.session_id = session_id;
  reply.reply = env.final_reply.value_or("");
  for (const auto& rec : env.stage_trace) reply.stage_trace.push_back(rec.stage);
  reply.clarification = env.intent && env.intent->clarification_needed;
  reply.failed = env.failure.has_value();
  if (env.confirmation) reply.preview = TransactionPreview{*env.confirmation};
  return reply;
}

DecisionResult Gateway::post_decision(const std::string& session_id, const std::string& tx_id,
                                      DecisionKind kind,
                                      const std::map<std::string, std::string>& edited_fields,
                                      const std::optional<std::string>& second_factor) {
  auto session = acquire(session_id);
  Lease lease{[&] { release(session); }};

  PendingTransaction tx = runtime_->bank->transaction(tx_id);
  if (tx.session_id != session_id) {
    throw Error(ErrorCode::kUnknownTransaction, "transaction " + tx_id + " is not in this session");
  }

  Decision decision{kind, std::nullopt};
  if (kind == DecisionKind::kEdit) {
    TransferDraft d = tx.draft;
    for (const auto& [field, value] : edited_fields) {
      if (field == "recipientName") {
        d.recipient_name = text::trim(value);
      } else if (field == "bankName") {
        d.bank_name = runtime_->directory->canonical(value).value_or(text::trim(value));
      } else if (field == "accountNumber") {
        d.account_number = text::trim(value);
      } else if (field == "amount") {
        auto amount = Money::parse(value);
        if (!amount) throw Error(ErrorCode::kStaleEdit, "amount: not a valid amount");
        d.amount = amount;
      } else if (field == "reference") {
        d.reference = text::trim(value).empty() ? std::string(kDefaultReference) : text::trim(value);
      } else {
        throw Error(ErrorCode::kStaleEdit, "unknown field " + field);
      }
    }
    decision.edited = d;
  }

  PendingTransaction after = runtime_->bank->decide(tx_id, decision, second_factor);

  DecisionResult result;
  result.tx_id = tx_id;
  result.state = after.state;
  result.reason = after.reason;
  result.requires_2fa = after.requires_2fa;
  result.message = decision_message(after);
  if (after.state == TxState::kAwaitingDecision) {
    result.preview = TransactionPreview{ConfirmationRequest{
        after.tx_id, after.draft, after.kind, after.requires_2fa,
        std::string(tx_state_name(after.state))}};
  } else if (session->payment.pending_tx_id == tx_id) {
    session->payment.pending_tx_id.reset();
  }
  if (after.state == TxState::kExecuted) {
    result.balance = runtime_->bank->query_account(session->account_id).available_balance;
  }
  return result;
}

std::optional<SessionView> Gateway::view(const std::string& session_id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  const Session& s = *it->second;
  if (s.busy) return SessionView{s.session_id, s.account_id, {}, std::nullopt};
  return SessionView{s.session_id, s.account_id, s.history, preview_for(s)};
}

void Gateway::check_admin(const std::string& token) const {
  if (admin_token_.empty() || token != admin_token_) {
    throw Error(ErrorCode::kAuthFailure, "admin token rejected");
  }
}

std::int64_t Gateway::admin_reload_blocklist(const std::string& token) {
  check_admin(token);
  const auto& cfg = runtime_->config;
  if (cfg.blocklist_path.empty()) throw Error(ErrorCode::kConfigError, "no blocklist file configured");
  auto policy = runtime_->blocklist->reload_file(cfg.resolve(cfg.blocklist_path));
  runtime_->audit->append("", "Admin", "blocklist_reloaded", "", "version:" + std::to_string(policy->version));
  return policy->version;
}

std::int64_t Gateway::admin_reload_blocklist(const std::string& token, std::string_view json_text) {
  check_admin(token);
  auto policy = runtime_->blocklist->reload(json_text);
  runtime_->audit->append("", "Admin", "blocklist_reloaded", text::sha256_hex(json_text),
                          "version:" + std::to_string(policy->version));
  return policy->version;
}

std::int64_t Gateway::admin_ingest_knowledge(const std::string& token, std::string_view jsonl_text) {
  check_admin(token);
  auto snapshot = runtime_->knowledge->ingest_jsonl(jsonl_text);
  runtime_->audit->append("", "Admin", "knowledge_ingested", text::sha256_hex(jsonl_text),
                          "version:" + std::to_string(snapshot->version));
  return snapshot->version;
}

std::string Gateway::admin_export_transactions(const std::string& token) {
  check_admin(token);
  std::ostringstream out;
  runtime_->bank->export_records(out);
  return out.str();
}

std::optional<std::string> Gateway::dev_peek_code(const std::string& session_id) const {
  if (!runtime_->config.dev_mode) return std::nullopt;
  return runtime_->bank->codes().peek(session_id);
}

}  // namespace tellerflow
