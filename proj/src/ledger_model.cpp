#include "credsearch/ledger_model.hpp"

#include <algorithm>
#include <initializer_list>
#include <set>

#include "credsearch/errors.hpp"

namespace credsearch {

using nlohmann::json;

namespace {

constexpr std::string_view kBase58Alphabet =
    "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

const json* find_path(const json& root,
                      std::initializer_list<std::string_view> path) {
  const json* node = &root;
  for (auto key : path) {
    if (!node->is_object()) return nullptr;
    auto it = node->find(key);
    if (it == node->end()) return nullptr;
    node = &*it;
  }
  return node;
}

[[noreturn]] void violation(const TxnEnvelope& env, const std::string& what) {
  throw Error(Errc::kPayloadSchemaViolation,
              "seqNo " + std::to_string(env.seq_no) + ": " + what);
}

std::optional<std::string> optional_string(const json& data,
                                           std::string_view key) {
  auto it = data.find(key);
  if (it == data.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

NymData classify_nym(const TxnEnvelope& env, const json& data) {
  auto dest_text = optional_string(data, "dest");
  if (!dest_text) violation(env, "NYM without dest");
  auto dest = Did::parse(*dest_text);
  if (!dest) violation(env, "NYM dest is not a DID");
  NymData nym{*dest, optional_string(data, "alias"),
              optional_string(data, "role")};
  if (nym.alias && nym.alias->empty()) nym.alias.reset();
  return nym;
}

SchemaData classify_schema(const TxnEnvelope& env, const json& data) {
  const json* body = find_path(data, {"data"});
  if (body == nullptr || !body->is_object()) violation(env, "SCHEMA without data");
  SchemaData schema;
  auto name = optional_string(*body, "name");
  if (!name || name->empty()) violation(env, "SCHEMA without name");
  schema.name = std::move(*name);
  auto version = optional_string(*body, "version");
  if (!version || !is_dotted_numeric(*version)) {
    violation(env, "SCHEMA version must be dotted numeric");
  }
  schema.version = std::move(*version);
  const json* attrs = find_path(*body, {"attr_names"});
  if (attrs == nullptr || !attrs->is_array() || attrs->empty()) {
    violation(env, "SCHEMA without attr_names");
  }
  std::set<std::string> seen;
  for (const auto& attr : *attrs) {
    if (!attr.is_string() || attr.get_ref<const std::string&>().empty()) {
      violation(env, "SCHEMA attr_names must be non-empty strings");
    }
    const auto& text = attr.get_ref<const std::string&>();
    if (!seen.insert(text).second) violation(env, "duplicate attribute " + text);
    schema.attr_names.push_back(text);
  }
  return schema;
}

ClaimDefData classify_claim_def(const TxnEnvelope& env, const json& data) {
  auto it = data.find("ref");
  if (it == data.end() || !it->is_number_integer()) {
    violation(env, "CLAIM_DEF without integer ref");
  }
  auto ref = it->get<std::int64_t>();
  if (ref < 1 || static_cast<SeqNo>(ref) >= env.seq_no) {
    violation(env, "CLAIM_DEF ref must point to an earlier transaction");
  }
  return ClaimDefData{static_cast<SeqNo>(ref),
                      optional_string(data, "signature_type").value_or(""),
                      optional_string(data, "tag").value_or("")};
}

}  // namespace

TxnType txn_type_from_wire(std::string_view code) {
  if (code == "1") return TxnType::kNym;
  if (code == "100") return TxnType::kAttrib;
  if (code == "101") return TxnType::kSchema;
  if (code == "102") return TxnType::kClaimDef;
  return TxnType::kOther;
}

std::string_view to_wire(TxnType type) {
  switch (type) {
    case TxnType::kNym: return "1";
    case TxnType::kAttrib: return "100";
    case TxnType::kSchema: return "101";
    case TxnType::kClaimDef: return "102";
    case TxnType::kOther: break;
  }
  return "";
}

std::string_view to_string(TxnType type) {
  switch (type) {
    case TxnType::kNym: return "NYM";
    case TxnType::kAttrib: return "ATTRIB";
    case TxnType::kSchema: return "SCHEMA";
    case TxnType::kClaimDef: return "CLAIM_DEF";
    case TxnType::kOther: break;
  }
  return "OTHER";
}

std::optional<TxnType> txn_type_from_name(std::string_view name) {
  if (name == "nym") return TxnType::kNym;
  if (name == "attrib") return TxnType::kAttrib;
  if (name == "schema") return TxnType::kSchema;
  if (name == "claim_def") return TxnType::kClaimDef;
  if (name == "other") return TxnType::kOther;
  return std::nullopt;
}

bool Did::is_valid(std::string_view text) {
  if (text.size() < 21 || text.size() > 22) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return kBase58Alphabet.find(c) != std::string_view::npos;
  });
}

std::optional<Did> Did::parse(std::string_view text) {
  if (!is_valid(text)) return std::nullopt;
  return Did(std::string(text));
}

Did Did::from(std::string_view text) {
  auto did = parse(text);
  if (!did) throw Error(Errc::kInvalidDid, "not a DID: " + std::string(text));
  return *did;
}

bool is_dotted_numeric(std::string_view version) {
  if (version.empty() || version.front() == '.' || version.back() == '.') {
    return false;
  }
  bool previous_dot = false;
  for (char c : version) {
    if (c == '.') {
      if (previous_dot) return false;
      previous_dot = true;
    } else if (c >= '0' && c <= '9') {
      previous_dot = false;
    } else {
      return false;
    }
  }
  return true;
}

TxnEnvelope parse_txn(std::string_view raw) {
  auto document = std::make_shared<json>();
  try {
    *document = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(Errc::kMalformedDocument, e.what());
  }
  if (!document->is_object()) {
    throw Error(Errc::kMalformedDocument, "transaction must be an object");
  }

  const json* seq = find_path(*document, {"txnMetadata", "seqNo"});
  if (seq == nullptr || seq->is_null()) {
    throw Error(Errc::kMissingField, "txnMetadata.seqNo");
  }
  if (!seq->is_number_integer() || seq->get<std::int64_t>() < 1) {
    throw Error(Errc::kInvalidSeqNo, "seqNo must be a positive integer");
  }

  const json* type = find_path(*document, {"txn", "type"});
  std::string type_code;
  if (type != nullptr && type->is_string()) {
    type_code = type->get<std::string>();
  } else if (type != nullptr && type->is_number_integer()) {
    type_code = std::to_string(type->get<std::int64_t>());
  } else {
    throw Error(Errc::kMissingField, "txn.type");
  }

  const json* from = find_path(*document, {"txn", "metadata", "from"});
  if (from == nullptr || !from->is_string()) {
    throw Error(Errc::kMissingField, "txn.metadata.from");
  }

  TxnEnvelope env;
  env.seq_no = seq->get<SeqNo>();
  env.txn_type = txn_type_from_wire(type_code);
  env.type_code = std::move(type_code);
  env.author_did = Did::from(from->get_ref<const std::string&>());
  const json* time = find_path(*document, {"txnMetadata", "txnTime"});
  if (time != nullptr && time->is_number_integer()) {
    env.txn_time = time->get<std::int64_t>();
  }
  env.raw = std::string(raw);
  env.document = std::move(document);
  return env;
}

LedgerEntry classify(const TxnEnvelope& env) {
  static const json kEmpty = json::object();
  const json* data = env.document ? find_path(*env.document, {"txn", "data"})
                                  : nullptr;
  const json& payload = (data != nullptr && data->is_object()) ? *data : kEmpty;

  switch (env.txn_type) {
    case TxnType::kNym:
      return {env, classify_nym(env, payload)};
    case TxnType::kSchema:
      return {env, classify_schema(env, payload)};
    case TxnType::kClaimDef:
      return {env, classify_claim_def(env, payload)};
    case TxnType::kAttrib:
      return {env, AttribOpaque{data ? data->dump() : std::string()}};
    case TxnType::kOther:
      break;
  }
  return {env, OtherOpaque{data ? data->dump() : std::string()}};
}

std::string canonical_leaf_bytes(const TxnEnvelope& env) {
  if (!env.document) return canonicalize(env.raw);
  return env.document->dump();
}

std::string canonicalize(std::string_view raw) {
  try {
    return json::parse(raw).dump();
  } catch (const json::parse_error& e) {
    throw Error(Errc::kMalformedDocument, e.what());
  }
}

}  // namespace credsearch
