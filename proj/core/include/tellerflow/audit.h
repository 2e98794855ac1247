#pragma once

#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tellerflow/types.h"

namespace tellerflow {

// One persisted audit record. Never carries user text: stage outputs are
// represented by the SHA-256 of their canonical bytes plus a category label
// ("Violent Crimes", "PAYMENT", "ReadyForConfirmation", ...).
struct AuditEvent {
  std::uint64_t sequence = 0;
  std::string session_id;
  std::string stage;  // stage name, or "Gateway" / "Admin" / "Ledger"
  std::string event_kind;
  std::string verdict_digest;
  std::string label;
  Timestamp timestamp{};
  bool redaction_applied = true;
};

std::string audit_event_to_json_line(const AuditEvent& event);

// Single serialized appender. Sequence numbers start at 1 and are gap-free
// for the life of the process. When a path is given every event is also
// appended to that JSON Lines file and flushed.
class AuditLog {
 public:
  AuditLog() = default;
  explicit AuditLog(const std::string& path);

  AuditEvent append(std::string session_id, std::string stage, std::string event_kind,
                    std::string verdict_digest, std::string label,
                    bool redaction_applied = true);

  std::vector<AuditEvent> events() const;
  std::uint64_t last_sequence() const;
  const std::optional<std::string>& path() const { return path_; }

 private:
  mutable std::mutex mu_;
  std::vector<AuditEvent> events_;
  std::uint64_t next_sequence_ = 1;
  std::optional<std::string> path_;
  std::ofstream out_;
};

}  // namespace tellerflow
