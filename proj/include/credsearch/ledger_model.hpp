#pragma once

// Data model for Indy-style domain ledger transactions.
//
// A transaction travels as a JSON document. The fields this library relies on:
//
//   txn.type               wire code: "1" NYM, "100" ATTRIB, "101" SCHEMA,
//                          "102" CLAIM_DEF, anything else OTHER
//   txn.metadata.from      author DID
//   txn.data               type specific payload
//   txnMetadata.seqNo      1-based ledger position
//   txnMetadata.txnTime    optional unix seconds

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace credsearch {

using SeqNo = std::uint64_t;

enum class TxnType { kNym, kAttrib, kSchema, kClaimDef, kOther };

TxnType txn_type_from_wire(std::string_view code);
std::string_view to_wire(TxnType type);
// "NYM", "ATTRIB", "SCHEMA", "CLAIM_DEF", "OTHER".
std::string_view to_string(TxnType type);
// Accepts the lowercase query-parameter spelling: nym, attrib, schema,
// claim_def, other.
std::optional<TxnType> txn_type_from_name(std::string_view name);

// Base58 identifier, 21 or 22 characters.
class Did {
 public:
  static bool is_valid(std::string_view text);
  static std::optional<Did> parse(std::string_view text);
  // Throws Error(kInvalidDid).
  static Did from(std::string_view text);

  const std::string& str() const noexcept { return value_; }

  auto operator<=>(const Did&) const = default;

 private:
  explicit Did(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

struct TxnEnvelope {
  SeqNo seq_no = 0;
  TxnType txn_type = TxnType::kOther;
  std::string type_code;
  Did author_did = Did::from("1111111111111111111111");
  std::optional<std::int64_t> txn_time;
  // Verbatim input text.
  std::string raw;
  // Parsed form of raw; shared so envelopes stay cheap to copy.
  std::shared_ptr<const nlohmann::json> document;
};

struct NymData {
  Did dest;
  std::optional<std::string> alias;
  std::optional<std::string> role;
};

struct SchemaData {
  std::string name;
  std::string version;
  std::vector<std::string> attr_names;
};

struct ClaimDefData {
  SeqNo schema_ref = 0;
  std::string signature_type;
  std::string tag;
};

struct AttribOpaque {
  std::string payload;
};

struct OtherOpaque {
  std::string payload;
};

using Payload =
    std::variant<NymData, SchemaData, ClaimDefData, AttribOpaque, OtherOpaque>;

struct LedgerEntry {
  TxnEnvelope envelope;
  Payload payload;
};

// Throws Error with kMalformedDocument, kMissingField, kInvalidSeqNo or
// kInvalidDid.
TxnEnvelope parse_txn(std::string_view raw);

// Throws Error(kPayloadSchemaViolation) when the payload does not match the
// shape its type requires.
LedgerEntry classify(const TxnEnvelope& env);

// Sorted keys, no insignificant whitespace, UTF-8. These are the bytes that
// become Merkle leaves.
std::string canonical_leaf_bytes(const TxnEnvelope& env);

// Same rule applied to arbitrary text; throws kMalformedDocument.
std::string canonicalize(std::string_view raw);

bool is_dotted_numeric(std::string_view version);

}  // namespace credsearch
