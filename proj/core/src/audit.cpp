#include "tellerflow/audit.h"

#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"

namespace tellerflow {

std::string audit_event_to_json_line(const AuditEvent& event) {
  Json j{{"sequence", event.sequence},
         {"sessionId", event.session_id},
         {"stage", event.stage},
         {"eventKind", event.event_kind},
         {"verdictDigest", event.verdict_digest},
         {"label", event.label},
         {"timestamp", format_utc(event.timestamp)},
         {"redactionApplied", event.redaction_applied}};
  return write_canonical_json(j);
}

AuditLog::AuditLog(const std::string& path) : path_(path) {
  out_.open(path, std::ios::app);
  if (!out_) throw Error(ErrorCode::kFileUnreadable, "cannot open audit log " + path);
}

AuditEvent AuditLog::append(std::string session_id, std::string stage, std::string event_kind,
                            std::string verdict_digest, std::string label,
                            bool redaction_applied) {
  std::lock_guard lock(mu_);
  AuditEvent event;
  event.sequence = next_sequence_++;
  event.session_id = std::move(session_id);
  event.stage = std::move(stage);
  event.event_kind = std::move(event_kind);
  event.verdict_digest = std::move(verdict_digest);
  event.label = std::move(label);
  event.timestamp = Clock::now();
  event.redaction_applied = redaction_applied;
  if (out_.is_open()) {
    out_ << audit_event_to_json_line(event) << '\n';
    out_.flush();
  }
  events_.push_back(event);
  return event;
}

std::vector<AuditEvent> AuditLog::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::uint64_t AuditLog::last_sequence() const {
  std::lock_guard lock(mu_);
  return next_sequence_ - 1;
}

}  // namespace tellerflow
