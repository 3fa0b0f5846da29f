#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace credsearch {

enum class Errc {
  kMalformedDocument,
  kMissingField,
  kInvalidSeqNo,
  kInvalidDid,
  kPayloadSchemaViolation,
  kIndexOutOfRange,
  kInvalidConfig,
  kSourceUnavailable,
  kGapDetected,
  kSequenceMismatch,
  kPersistenceFailure,
  kVerificationFailure,
  kDuplicateDocument,
  kUnknownDocument,
  kEmptyQuery,
  kInvalidQuery,
  kTargetUnreachable,
  kNonZeroErrorRate,
};

std::string_view to_string(Errc code);

// Every failure surfaced by the library carries one of the codes above so
// callers can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace credsearch
