#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "credsearch/ledger_model.hpp"

namespace credsearch {

// Flattened search document: one ledger transaction plus the fields joined in
// from related transactions (schema of a CLAIM_DEF, alias of the author).
struct EnrichedDoc {
  SeqNo seq_no = 0;
  TxnType txn_type = TxnType::kOther;
  std::optional<std::string> schema_name;
  std::optional<std::string> schema_version;
  std::vector<std::string> attr_names;
  Did author_did = Did::from("1111111111111111111111");
  std::optional<std::string> author_alias;
  std::optional<SeqNo> ref_schema_seq;
  std::optional<std::int64_t> txn_time;
  // Canonical document text.
  std::string raw;

  bool operator==(const EnrichedDoc&) const = default;
};

}  // namespace credsearch
