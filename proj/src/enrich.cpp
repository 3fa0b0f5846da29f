#include "credsearch/enrich.hpp"

#include <set>

#include "credsearch/errors.hpp"

namespace credsearch {

bool AliasDirectory::update(const Did& did, std::string alias, SeqNo seq_no) {
  auto [it, inserted] = by_did_.try_emplace(did.str(), Record{alias, seq_no});
  if (inserted) return true;
  if (seq_no < it->second.seq_no) return false;
  const bool changed = it->second.alias != alias;
  it->second = Record{std::move(alias), seq_no};
  return changed;
}

std::optional<std::string> AliasDirectory::lookup(const Did& did) const {
  auto it = by_did_.find(did.str());
  if (it == by_did_.end()) return std::nullopt;
  return it->second.alias;
}

const AliasDirectory::Record* AliasDirectory::record(const Did& did) const {
  auto it = by_did_.find(did.str());
  return it == by_did_.end() ? nullptr : &it->second;
}

EnrichedDoc enrich(const LedgerEntry& entry, const SchemaLookup& schemas,
                   const AliasDirectory& aliases) {
  const TxnEnvelope& env = entry.envelope;
  EnrichedDoc doc;
  doc.seq_no = env.seq_no;
  doc.txn_type = env.txn_type;
  doc.author_did = env.author_did;
  doc.author_alias = aliases.lookup(env.author_did);
  doc.txn_time = env.txn_time;
  doc.raw = canonical_leaf_bytes(env);

  if (const auto* schema = std::get_if<SchemaData>(&entry.payload)) {
    doc.schema_name = schema->name;
    doc.schema_version = schema->version;
    doc.attr_names = schema->attr_names;
  } else if (const auto* cred_def = std::get_if<ClaimDefData>(&entry.payload)) {
    doc.ref_schema_seq = cred_def->schema_ref;
    if (auto it = schemas.find(cred_def->schema_ref); it != schemas.end()) {
      doc.schema_name = it->second.name;
      doc.schema_version = it->second.version;
      doc.attr_names = it->second.attr_names;
    }
  }
  return doc;
}

IndexBatch Enricher::ingest(std::span<const LedgerEntry> entries, const DocLookup& existing) {
  IndexBatch batch;
  std::set<std::string> moved;

  for (const auto& entry : entries) {
    if (const auto* nym = std::get_if<NymData>(&entry.payload)) {
      if (nym->alias && aliases_.update(nym->dest, *nym->alias, entry.envelope.seq_no)) {
        moved.insert(nym->dest.str());
      }
    } else if (const auto* schema = std::get_if<SchemaData>(&entry.payload)) {
      schemas_.emplace(entry.envelope.seq_no, *schema);
    }
  }

  const SeqNo first_new = entries.empty() ? 0 : entries.front().envelope.seq_no;
  for (const auto& did : moved) {
    auto it = authored_.find(did);
    if (it == authored_.end()) continue;
    const std::optional<std::string> alias = aliases_.lookup(Did::from(did));
    for (SeqNo seq : it->second) {
      if (seq >= first_new) continue;
      std::optional<EnrichedDoc> current = existing ? existing(seq) : std::nullopt;
      if (!current) continue;
      if (current->author_alias == alias) continue;
      current->author_alias = alias;
      batch.removals.push_back(seq);
      batch.additions.push_back(std::move(*current));
    }
  }

  for (const auto& entry : entries) {
    batch.additions.push_back(enrich(entry, schemas_, aliases_));
    authored_[entry.envelope.author_did.str()].push_back(entry.envelope.seq_no);
  }
  return batch;
}

std::vector<EnrichedDoc> enrich_ledger(std::span<const std::string> documents) {
  std::vector<LedgerEntry> entries;
  entries.reserve(documents.size());
  for (const auto& text : documents) {
    try {
      entries.push_back(classify(parse_txn(text)));
    } catch (const Error& e) {
      if (e.code() != Errc::kPayloadSchemaViolation) throw;
    }
  }
  Enricher enricher;
  return enricher.ingest(entries, nullptr).additions;
}

}  // namespace credsearch
