#pragma once

// In-memory inverted index over EnrichedDocs with per-field BM25 statistics
// and typo-tolerant term expansion.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "credsearch/analyzer.hpp"
#include "credsearch/enriched_doc.hpp"
#include "credsearch/scoring.hpp"

namespace credsearch {

struct Posting {
  SeqNo seq_no = 0;
  std::uint32_t term_frequency = 0;
  // Copied from the document so type filters skip postings without touching
  // per-document data.
  TxnType txn_type = TxnType::kOther;

  bool operator==(const Posting&) const = default;
};

// Postings of one term, one list per field, each sorted by seq_no.
struct PostingList {
  std::array<std::vector<Posting>, kFieldCount> by_field;

  bool empty() const;
  bool operator==(const PostingList&) const = default;
};

struct IndexStats {
  std::uint64_t doc_count = 0;
  std::uint64_t term_count = 0;
  std::array<std::uint64_t, kFieldCount> total_length{};
  std::array<double, kFieldCount> average_length{};

  bool operator==(const IndexStats&) const = default;
};

// Not thread-safe; see ConcurrentIndex for shared use. Move-only because the
// length buckets reference the term dictionary's keys.
class InvertedIndex {
 public:
  explicit InvertedIndex(MatchPolicy policy = {});
  InvertedIndex(InvertedIndex&&) = default;
  InvertedIndex& operator=(InvertedIndex&&) = default;
  InvertedIndex(const InvertedIndex&) = delete;
  InvertedIndex& operator=(const InvertedIndex&) = delete;

  // Throws Error(kDuplicateDocument).
  void add_document(EnrichedDoc doc);
  // Throws Error(kUnknownDocument).
  void remove_document(SeqNo seq_no);

  bool contains(SeqNo seq_no) const;
  const EnrichedDoc* find(SeqNo seq_no) const;
  std::uint64_t doc_count() const { return docs_.size(); }
  IndexStats stats() const;
  const PostingList* postings(std::string_view term) const;
  std::uint64_t document_frequency(std::string_view term, Field field) const;

  // Sorted by term.
  std::vector<TermMatch> expand_term(std::string_view term) const;

  // Throws Error(kEmptyQuery) when the text has no tokens and
  // Error(kInvalidQuery) for a bad window or weights.
  SearchResult search(const Query& query, const FieldWeights& weights) const;

  // Structural equality: same documents, postings and statistics.
  bool same_contents(const InvertedIndex& other) const;

 private:
  struct DocSlot {
    const EnrichedDoc* doc = nullptr;
    TxnType type = TxnType::kOther;
    std::array<std::uint32_t, kFieldCount> length{};
  };

  bool has_term_in_doc(const PostingList& list, SeqNo seq) const;

  struct TermEntry {
    PostingList postings;
    // Position within the length bucket of this term.
    std::uint32_t slot = 0;
  };
  using TermMap = std::map<std::string, TermEntry, std::less<>>;

  // Terms of one byte length stored back to back, so the fuzzy prefilter
  // reads memory sequentially. Unordered; removal swaps in the last term.
  struct LengthBucket {
    std::vector<char> bytes;
    std::vector<TermMap::value_type*> terms;
  };

  void bucket_insert(TermMap::value_type& term);
  void bucket_erase(TermMap::value_type& term);

  MatchPolicy policy_;
  TermMap terms_;
  std::vector<LengthBucket> buckets_;
  std::map<SeqNo, EnrichedDoc> docs_;
  std::vector<DocSlot> slots_;
  std::array<std::uint64_t, kFieldCount> total_length_{};
};

// Batch of index mutations applied as one unit.
struct IndexBatch {
  std::vector<SeqNo> removals;
  std::vector<EnrichedDoc> additions;

  bool empty() const { return removals.empty() && additions.empty(); }
};

// Snapshot semantics through reader/writer exclusion: searches hold a shared
// lock for their whole evaluation and apply() holds the exclusive lock for a
// whole batch, so a reader sees the index either before or after a batch.
// Writers pass through a turnstile that new readers must also cross, so a
// steady stream of searches cannot starve apply().
class ConcurrentIndex {
 public:
  explicit ConcurrentIndex(MatchPolicy policy = {}) : index_(policy) {}

  // All-or-nothing: on error the index is left as before the batch.
  void apply(IndexBatch batch);
  void reset(MatchPolicy policy = {});

  SearchResult search(const Query& query, const FieldWeights& weights) const;
  std::uint64_t doc_count() const;

  // Runs fn under the shared lock.
  template <typename Fn>
  auto read(Fn&& fn) const {
    auto lock = shared();
    return std::invoke(std::forward<Fn>(fn), index_);
  }

 private:
  std::shared_lock<std::shared_mutex> shared() const {
    { std::lock_guard gate(turnstile_); }
    return std::shared_lock(mutex_);
  }

  mutable std::mutex turnstile_;
  mutable std::shared_mutex mutex_;
  InvertedIndex index_;
};

}  // namespace credsearch
