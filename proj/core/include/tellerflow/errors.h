#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tellerflow {

// Every failure that crosses a module boundary carries one of these codes.
// The gateway maps them onto HTTP status codes; the CLI onto exit codes.
enum class ErrorCode {
  kInputRejected,
  kUnknownType,
  kMissingBinding,
  kSchemaViolation,
  kBackendUnavailable,
  kAgentFailure,
  kUnroutableIntent,
  kParseError,
  kEmptyText,
  kEmptyStore,
  kOcrUnavailable,
  kUnknownAccount,
  kUnknownTransaction,
  kInsufficientFunds,
  kLimitExceeded,
  kAmlFlagged,
  kTwoFaRequired,
  kInvalidState,
  kStaleEdit,
  kUnknownSession,
  kPipelineBusy,
  kAuthFailure,
  kFileUnreadable,
  kConfigError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tellerflow
