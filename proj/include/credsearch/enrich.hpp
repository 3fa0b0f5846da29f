#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "credsearch/enriched_doc.hpp"
#include "credsearch/index.hpp"
#include "credsearch/ledger_model.hpp"

namespace credsearch {

using SchemaLookup = std::unordered_map<SeqNo, SchemaData>;

// DID -> alias, last write (highest seqNo) wins.
class AliasDirectory {
 public:
  struct Record {
    std::string alias;
    SeqNo seq_no = 0;
  };

  // Returns true when the visible alias of `did` changed.
  bool update(const Did& did, std::string alias, SeqNo seq_no);
  std::optional<std::string> lookup(const Did& did) const;
  const Record* record(const Did& did) const;
  std::size_t size() const { return by_did_.size(); }

 private:
  std::unordered_map<std::string, Record> by_did_;
};

// Pure join of one classified entry against the current lookups.
EnrichedDoc enrich(const LedgerEntry& entry, const SchemaLookup& schemas,
                   const AliasDirectory& aliases);

// Current document for a seqNo, used when older documents need re-joining.
using DocLookup = std::function<std::optional<EnrichedDoc>(SeqNo)>;

// Stateful enrichment across batches. Feeding the ledger in any batch split
// yields the same final documents as feeding it in one piece: aliases are
// applied after the whole batch is folded into the directory, and documents
// from earlier batches whose author's alias moved are re-emitted.
class Enricher {
 public:
  // Entries must be in ascending seqNo order and follow earlier batches.
  IndexBatch ingest(std::span<const LedgerEntry> entries, const DocLookup& existing);

  const AliasDirectory& aliases() const { return aliases_; }
  const SchemaLookup& schemas() const { return schemas_; }

 private:
  SchemaLookup schemas_;
  AliasDirectory aliases_;
  std::unordered_map<std::string, std::vector<SeqNo>> authored_;
};

// Parses, classifies and enriches a whole ledger. Documents that fail to
// classify are skipped, as during sync.
std::vector<EnrichedDoc> enrich_ledger(std::span<const std::string> documents);

}  // namespace credsearch
