#include "credsearch/errors.hpp"

namespace credsearch {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kMalformedDocument: return "MalformedDocument";
    case Errc::kMissingField: return "MissingField";
    case Errc::kInvalidSeqNo: return "InvalidSeqNo";
    case Errc::kInvalidDid: return "InvalidDid";
    case Errc::kPayloadSchemaViolation: return "PayloadSchemaViolation";
    case Errc::kIndexOutOfRange: return "IndexOutOfRange";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kSourceUnavailable: return "SourceUnavailable";
    case Errc::kGapDetected: return "GapDetected";
    case Errc::kSequenceMismatch: return "SequenceMismatch";
    case Errc::kPersistenceFailure: return "PersistenceFailure";
    case Errc::kVerificationFailure: return "VerificationFailure";
    case Errc::kDuplicateDocument: return "DuplicateDocument";
    case Errc::kUnknownDocument: return "UnknownDocument";
    case Errc::kEmptyQuery: return "EmptyQuery";
    case Errc::kInvalidQuery: return "InvalidQuery";
    case Errc::kTargetUnreachable: return "TargetUnreachable";
    case Errc::kNonZeroErrorRate: return "NonZeroErrorRate";
  }
  return "Unknown";
}

}  // namespace credsearch
