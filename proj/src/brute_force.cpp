#include "credsearch/brute_force.hpp"

#include <algorithm>
#include <set>

#include "credsearch/analyzer.hpp"
#include "credsearch/edit_distance.hpp"
#include "credsearch/errors.hpp"

namespace credsearch {

BruteForceCorpus::BruteForceCorpus(std::vector<EnrichedDoc> docs, MatchPolicy policy)
    : policy_(policy) {
  std::sort(docs.begin(), docs.end(),
            [](const EnrichedDoc& a, const EnrichedDoc& b) { return a.seq_no < b.seq_no; });
  docs_.reserve(docs.size());
  for (auto& doc : docs) {
    Entry entry;
    const FieldTokens fields = analyze(doc);
    for (std::size_t f = 0; f < kFieldCount; ++f) {
      entry.length[f] = static_cast<std::uint32_t>(fields[f].size());
      for (const auto& token : fields[f]) ++entry.tf[f][token];
    }
    for (const auto& field : entry.tf) {
      for (const auto& [token, count] : field) vocabulary_.insert(token);
    }
    entry.doc = std::move(doc);
    docs_.push_back(std::move(entry));
  }
}

std::vector<TermMatch> BruteForceCorpus::expand_term(const std::string& term) const {
  const std::set<std::string>& vocabulary = vocabulary_;
  const bool exact = vocabulary.contains(term);
  if (exact && policy_.exact_short_circuit) return {TermMatch{term, 0, 1.0}};

  std::map<std::string, TermMatch, std::less<>> matches;
  if (exact) matches.emplace(term, TermMatch{term, 0, 1.0});
  const std::size_t budget = max_edits(term.size());
  for (const auto& candidate : vocabulary) {
    if (candidate == term) continue;
    const std::size_t d = osa_distance(term, candidate);
    if (budget > 0 && d <= budget) {
      merge_match(matches, TermMatch{candidate, d, fuzzy_scale(d, budget)});
    }
    if (policy_.prefix_matching && candidate.size() > term.size() &&
        candidate.compare(0, term.size(), term) == 0) {
      merge_match(matches, TermMatch{candidate, 0, kPrefixScale});
    }
  }
  std::vector<TermMatch> out;
  for (auto& [key, match] : matches) out.push_back(std::move(match));
  return out;
}

SearchResult BruteForceCorpus::search(const Query& query,
                                      const FieldWeights& weights) const {
  query.validate();
  weights.validate();
  const auto tokens = tokenize(query.text);
  if (tokens.empty()) throw Error(Errc::kEmptyQuery, "query has no terms");

  SearchResult result;
  if (docs_.empty()) return result;

  const std::uint64_t n = docs_.size();
  std::array<std::uint64_t, kFieldCount> total{};
  for (const auto& entry : docs_) {
    for (std::size_t f = 0; f < kFieldCount; ++f) total[f] += entry.length[f];
  }
  std::array<double, kFieldCount> average{};
  for (std::size_t f = 0; f < kFieldCount; ++f) {
    average[f] = static_cast<double>(total[f]) / static_cast<double>(n);
  }

  std::vector<std::vector<TermMatch>> expansions;
  for (const auto& token : tokens) expansions.push_back(expand_term(token));

  // Document frequency of every (expanded term, field) pair, by counting.
  std::map<std::pair<std::string, std::size_t>, std::uint64_t> df;
  for (const auto& matches : expansions) {
    for (const auto& match : matches) {
      for (std::size_t f = 0; f < kFieldCount; ++f) {
        auto key = std::make_pair(match.term, f);
        if (df.contains(key)) continue;
        std::uint64_t count = 0;
        for (const auto& entry : docs_) count += entry.tf[f].contains(match.term) ? 1 : 0;
        df[key] = count;
      }
    }
  }

  std::vector<ScoredHit> ranked;
  for (const auto& entry : docs_) {
    const EnrichedDoc& doc = entry.doc;
    if (query.type_filter && !query.type_filter->contains(doc.txn_type)) continue;
    if (query.author && doc.author_did.str() != *query.author) continue;
    ScoredHit hit{doc.seq_no, 0.0, {}};
    bool matched = false;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      for (const auto& match : expansions[t]) {
        bool in_doc = false;
        for (std::size_t f = 0; f < kFieldCount; ++f) {
          auto it = entry.tf[f].find(match.term);
          if (it == entry.tf[f].end()) continue;
          in_doc = true;
          const double idf = bm25_idf(n, df[{match.term, f}]);
          hit.score += bm25_contribution(weights.boost[f], match.scale, idf,
                                         it->second, entry.length[f], average[f]);
        }
        if (in_doc) {
          matched = true;
          MatchedTerm term{tokens[t], match.term, match.distance};
          if (std::find(hit.matched_terms.begin(), hit.matched_terms.end(), term) ==
              hit.matched_terms.end()) {
            hit.matched_terms.push_back(std::move(term));
          }
        }
      }
    }
    if (matched) ranked.push_back(std::move(hit));
  }

  std::sort(ranked.begin(), ranked.end(), ranks_before);
  result.total = ranked.size();
  for (std::size_t i = query.offset; i < ranked.size() && i < query.offset + query.limit;
       ++i) {
    result.hits.push_back(std::move(ranked[i]));
  }
  return result;
}

SearchResult brute_force_search(std::vector<EnrichedDoc> docs, const Query& query,
                                const FieldWeights& weights, MatchPolicy policy) {
  return BruteForceCorpus(std::move(docs), policy).search(query, weights);
}

}  // namespace credsearch
