#pragma once

// Ranking vocabulary shared by the inverted index and the brute-force
// reference scorer.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "credsearch/analyzer.hpp"
#include "credsearch/ledger_model.hpp"

namespace credsearch {

inline constexpr double kBm25K1 = 1.2;
inline constexpr double kBm25B = 0.75;
inline constexpr double kPrefixScale = 0.5;
inline constexpr std::size_t kMaxLimit = 1000;

// Edit budget by query term length: 0 up to 2 bytes, 1 for 3-4, 2 from 5.
constexpr std::size_t max_edits(std::size_t term_length) {
  if (term_length <= 2) return 0;
  if (term_length <= 4) return 1;
  return 2;
}

inline double fuzzy_scale(std::size_t distance, std::size_t budget) {
  return 1.0 - static_cast<double>(distance) / static_cast<double>(budget + 1);
}

inline double bm25_idf(std::uint64_t doc_count, std::uint64_t df) {
  const double n = static_cast<double>(doc_count);
  const double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

// boost(f) * scale * BM25 of one (expanded term, field, document) triple.
inline double bm25_contribution(double boost, double scale, double idf,
                                std::uint32_t tf, std::uint32_t field_length,
                                double average_length) {
  const double f = static_cast<double>(tf);
  const double norm =
      kBm25K1 * (1.0 - kBm25B +
                 kBm25B * static_cast<double>(field_length) / average_length);
  return boost * scale * idf * (f * (kBm25K1 + 1.0) / (f + norm));
}

struct MatchPolicy {
  // An exact hit on the query term suppresses fuzzy and prefix expansion.
  bool exact_short_circuit = true;
  bool prefix_matching = true;
};

// One index term a query term expands to.
struct TermMatch {
  std::string term;
  std::size_t distance = 0;
  double scale = 1.0;

  bool operator==(const TermMatch&) const = default;
};

struct MatchedTerm {
  std::string query_term;
  std::string index_term;
  std::size_t distance = 0;

  bool operator==(const MatchedTerm&) const = default;
};

struct ScoredHit {
  SeqNo seq_no = 0;
  double score = 0.0;
  std::vector<MatchedTerm> matched_terms;
};

struct Query {
  std::string text;
  std::optional<std::set<TxnType>> type_filter;
  std::size_t limit = 10;
  std::size_t offset = 0;
  // Exact match on the author DID.
  std::optional<std::string> author;

  // Throws Error(kInvalidQuery) for a limit outside 1..1000.
  void validate() const;
};

struct SearchResult {
  std::size_t total = 0;
  std::vector<ScoredHit> hits;
};

// Ordering for ranked hits: score descending, then seq_no ascending.
inline bool ranks_before(const ScoredHit& a, const ScoredHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.seq_no < b.seq_no;
}

// Adds a fuzzy or prefix candidate, keeping the larger scale when a term
// qualifies both ways.
void merge_match(std::map<std::string, TermMatch, std::less<>>& matches,
                 TermMatch candidate);

}  // namespace credsearch
