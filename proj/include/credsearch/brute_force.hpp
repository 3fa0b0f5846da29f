#pragma once

// Reference scorer: same ranking contract as InvertedIndex::search, computed
// by scanning every document and comparing the query against every
// vocabulary term with the full edit-distance matrix. Used as ground truth.

#include <array>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "credsearch/enriched_doc.hpp"
#include "credsearch/scoring.hpp"

namespace credsearch {

class BruteForceCorpus {
 public:
  explicit BruteForceCorpus(std::vector<EnrichedDoc> docs, MatchPolicy policy = {});

  std::size_t size() const { return docs_.size(); }
  std::vector<TermMatch> expand_term(const std::string& term) const;
  SearchResult search(const Query& query, const FieldWeights& weights) const;

 private:
  struct Entry {
    EnrichedDoc doc;
    std::array<std::unordered_map<std::string, std::uint32_t>, kFieldCount> tf;
    std::array<std::uint32_t, kFieldCount> length{};
  };

  MatchPolicy policy_;
  std::vector<Entry> docs_;
  // Every distinct token of every field, collected while scanning the docs.
  std::set<std::string> vocabulary_;
};

SearchResult brute_force_search(std::vector<EnrichedDoc> docs, const Query& query,
                                const FieldWeights& weights,
                                MatchPolicy policy = {});

}  // namespace credsearch
