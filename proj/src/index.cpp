#include "credsearch/index.hpp"

#include <algorithm>
#include <bitset>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "credsearch/edit_distance.hpp"
#include "credsearch/errors.hpp"

namespace credsearch {

namespace {

std::uint8_t type_mask(const std::optional<std::set<TxnType>>& filter) {
  if (!filter) return 0xff;
  std::uint8_t mask = 0;
  for (auto type : *filter) mask |= static_cast<std::uint8_t>(1U << static_cast<int>(type));
  return mask;
}

bool type_allowed(std::uint8_t mask, TxnType type) {
  return (mask >> static_cast<int>(type) & 1U) != 0;
}

// Counts per-field term frequencies of one analyzed document.
std::array<std::unordered_map<std::string_view, std::uint32_t>, kFieldCount>
count_terms(const FieldTokens& fields) {
  std::array<std::unordered_map<std::string_view, std::uint32_t>, kFieldCount> tf;
  for (std::size_t f = 0; f < kFieldCount; ++f) {
    for (const auto& token : fields[f]) ++tf[f][token];
  }
  return tf;
}

struct Accumulator {
  std::vector<double> score;
  std::vector<std::uint32_t> stamp;
  std::vector<SeqNo> touched;
  std::uint32_t generation = 0;

  void begin(std::size_t capacity) {
    if (score.size() < capacity) {
      score.resize(capacity);
      stamp.resize(capacity);
    }
    touched.clear();
    if (++generation == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      generation = 1;
    }
  }

  void add(SeqNo seq, double value) {
    if (stamp[seq] != generation) {
      stamp[seq] = generation;
      score[seq] = 0.0;
      touched.push_back(seq);
    }
    score[seq] += value;
  }
};

// Searches borrow accumulators from a LIFO pool rather than owning one per
// thread: an HTTP server runs many more threads than cores, and reusing the
// most recently returned buffer keeps it in cache.
class AccumulatorLease {
 public:
  AccumulatorLease() {
    std::lock_guard lock(mutex());
    auto& free = pool();
    if (free.empty()) {
      acc_ = std::make_unique<Accumulator>();
    } else {
      acc_ = std::move(free.back());
      free.pop_back();
    }
  }
  ~AccumulatorLease() {
    std::lock_guard lock(mutex());
    pool().push_back(std::move(acc_));
  }
  AccumulatorLease(const AccumulatorLease&) = delete;
  AccumulatorLease& operator=(const AccumulatorLease&) = delete;

  Accumulator& operator*() { return *acc_; }

 private:
  static std::mutex& mutex() {
    static std::mutex m;
    return m;
  }
  static std::vector<std::unique_ptr<Accumulator>>& pool() {
    static std::vector<std::unique_ptr<Accumulator>> p;
    return p;
  }

  std::unique_ptr<Accumulator> acc_;
};

}  // namespace

bool PostingList::empty() const {
  return std::all_of(by_field.begin(), by_field.end(),
                     [](const auto& list) { return list.empty(); });
}

InvertedIndex::InvertedIndex(MatchPolicy policy) : policy_(policy) {}

bool InvertedIndex::contains(SeqNo seq_no) const { return docs_.contains(seq_no); }

const EnrichedDoc* InvertedIndex::find(SeqNo seq_no) const {
  auto it = docs_.find(seq_no);
  return it == docs_.end() ? nullptr : &it->second;
}

void InvertedIndex::add_document(EnrichedDoc doc) {
  const SeqNo seq = doc.seq_no;
  if (docs_.contains(seq)) {
    throw Error(Errc::kDuplicateDocument, "seqNo " + std::to_string(seq));
  }
  const FieldTokens fields = analyze(doc);
  const auto tf = count_terms(fields);

  auto [doc_it, inserted] = docs_.emplace(seq, std::move(doc));
  if (slots_.size() <= seq) slots_.resize(seq + 1);
  DocSlot& slot = slots_[seq];
  slot.doc = &doc_it->second;
  slot.type = slot.doc->txn_type;

  for (std::size_t f = 0; f < kFieldCount; ++f) {
    slot.length[f] = static_cast<std::uint32_t>(fields[f].size());
    total_length_[f] += fields[f].size();
    for (const auto& [term, count] : tf[f]) {
      auto it = terms_.find(term);
      if (it == terms_.end()) {
        it = terms_.emplace(std::string(term), TermEntry{}).first;
        bucket_insert(*it);
      }
      auto& list = it->second.postings.by_field[f];
      Posting posting{seq, count, slot.type};
      if (list.empty() || list.back().seq_no < seq) {
        list.push_back(posting);
      } else {
        auto pos = std::lower_bound(
            list.begin(), list.end(), seq,
            [](const Posting& p, SeqNo s) { return p.seq_no < s; });
        list.insert(pos, posting);
      }
    }
  }
}

void InvertedIndex::remove_document(SeqNo seq_no) {
  auto doc_it = docs_.find(seq_no);
  if (doc_it == docs_.end()) {
    throw Error(Errc::kUnknownDocument, "seqNo " + std::to_string(seq_no));
  }
  const FieldTokens fields = analyze(doc_it->second);
  const auto tf = count_terms(fields);
  for (std::size_t f = 0; f < kFieldCount; ++f) {
    total_length_[f] -= fields[f].size();
    for (const auto& [term, count] : tf[f]) {
      auto it = terms_.find(term);
      auto& list = it->second.postings.by_field[f];
      auto pos = std::lower_bound(
          list.begin(), list.end(), seq_no,
          [](const Posting& p, SeqNo s) { return p.seq_no < s; });
      list.erase(pos);
      if (it->second.postings.empty()) {
        bucket_erase(*it);
        terms_.erase(it);
      }
    }
  }
  slots_[seq_no] = DocSlot{};
  docs_.erase(doc_it);
  while (!slots_.empty() && slots_.back().doc == nullptr) slots_.pop_back();
  while (!buckets_.empty() && buckets_.back().terms.empty()) buckets_.pop_back();
}

void InvertedIndex::bucket_insert(TermMap::value_type& term) {
  const std::string& key = term.first;
  if (buckets_.size() <= key.size()) buckets_.resize(key.size() + 1);
  LengthBucket& bucket = buckets_[key.size()];
  term.second.slot = static_cast<std::uint32_t>(bucket.terms.size());
  bucket.terms.push_back(&term);
  bucket.bytes.insert(bucket.bytes.end(), key.begin(), key.end());
}

void InvertedIndex::bucket_erase(TermMap::value_type& term) {
  const std::size_t len = term.first.size();
  LengthBucket& bucket = buckets_[len];
  const std::uint32_t slot = term.second.slot;
  const std::size_t last = bucket.terms.size() - 1;
  if (slot != last) {
    TermMap::value_type* moved = bucket.terms[last];
    bucket.terms[slot] = moved;
    moved->second.slot = slot;
    std::copy_n(bucket.bytes.begin() + static_cast<std::ptrdiff_t>(last * len), len,
                bucket.bytes.begin() + static_cast<std::ptrdiff_t>(slot * len));
  }
  bucket.terms.pop_back();
  bucket.bytes.resize(last * len);
}

IndexStats InvertedIndex::stats() const {
  IndexStats stats;
  stats.doc_count = docs_.size();
  stats.term_count = terms_.size();
  stats.total_length = total_length_;
  for (std::size_t f = 0; f < kFieldCount; ++f) {
    stats.average_length[f] =
        docs_.empty() ? 0.0
                      : static_cast<double>(total_length_[f]) /
                            static_cast<double>(docs_.size());
  }
  return stats;
}

const PostingList* InvertedIndex::postings(std::string_view term) const {
  auto it = terms_.find(term);
  return it == terms_.end() ? nullptr : &it->second.postings;
}

std::uint64_t InvertedIndex::document_frequency(std::string_view term,
                                                Field field) const {
  const auto* list = postings(term);
  return list == nullptr ? 0 : list->by_field[field_index(field)].size();
}

std::vector<TermMatch> InvertedIndex::expand_term(std::string_view term) const {
  const bool exact = terms_.contains(term);
  if (exact && policy_.exact_short_circuit) {
    return {TermMatch{std::string(term), 0, 1.0}};
  }

  std::map<std::string, TermMatch, std::less<>> matches;
  if (exact) matches.emplace(std::string(term), TermMatch{std::string(term), 0, 1.0});

  const std::size_t budget = max_edits(term.size());
  if (budget > 0) {
    std::bitset<256> query_bytes;
    for (unsigned char c : term) query_bytes.set(c);
    const std::size_t lo = term.size() > budget ? term.size() - budget : 0;
    const std::size_t hi = std::min(term.size() + budget + 1, buckets_.size());
    for (std::size_t len = std::max<std::size_t>(lo, 1); len < hi; ++len) {
      const LengthBucket& bucket = buckets_[len];
      for (std::size_t i = 0; i < bucket.terms.size(); ++i) {
        const std::string_view candidate(bucket.bytes.data() + i * len, len);
        // Each edit introduces at most one byte absent from the query term.
        std::size_t foreign = 0;
        for (unsigned char c : candidate) {
          if (!query_bytes.test(c) && ++foreign > budget) break;
        }
        if (foreign > budget || candidate == term) continue;
        const std::size_t d = bounded_osa_distance(term, candidate, budget);
        if (d <= budget) {
          merge_match(matches, TermMatch{std::string(candidate), d, fuzzy_scale(d, budget)});
        }
      }
    }
  }

  if (policy_.prefix_matching) {
    for (auto it = terms_.upper_bound(term);
         it != terms_.end() && it->first.starts_with(term); ++it) {
      merge_match(matches, TermMatch{it->first, 0, kPrefixScale});
    }
  }

  std::vector<TermMatch> out;
  out.reserve(matches.size());
  for (auto& [key, match] : matches) out.push_back(std::move(match));
  return out;
}

bool InvertedIndex::has_term_in_doc(const PostingList& list, SeqNo seq) const {
  for (const auto& field_list : list.by_field) {
    if (std::binary_search(field_list.begin(), field_list.end(), Posting{seq, 0},
                           [](const Posting& a, const Posting& b) {
                             return a.seq_no < b.seq_no;
                           })) {
      return true;
    }
  }
  return false;
}

SearchResult InvertedIndex::search(const Query& query,
                                   const FieldWeights& weights) const {
  query.validate();
  weights.validate();
  const auto tokens = tokenize(query.text);
  if (tokens.empty()) throw Error(Errc::kEmptyQuery, "query has no terms");

  SearchResult result;
  if (docs_.empty()) return result;

  const std::uint8_t mask = type_mask(query.type_filter);
  const std::uint64_t n = docs_.size();
  std::array<double, kFieldCount> average{};
  for (std::size_t f = 0; f < kFieldCount; ++f) {
    average[f] = static_cast<double>(total_length_[f]) / static_cast<double>(n);
  }

  AccumulatorLease lease;
  Accumulator& acc = *lease;
  acc.begin(slots_.size());

  std::vector<std::vector<TermMatch>> expansions;
  expansions.reserve(tokens.size());
  for (const auto& token : tokens) {
    expansions.push_back(expand_term(token));
    for (const auto& match : expansions.back()) {
      const PostingList& list = terms_.find(match.term)->second.postings;
      for (std::size_t f = 0; f < kFieldCount; ++f) {
        const auto& field_list = list.by_field[f];
        if (field_list.empty()) continue;
        const double idf = bm25_idf(n, field_list.size());
        for (const Posting& p : field_list) {
          if (!type_allowed(mask, p.txn_type)) continue;
          const DocSlot& slot = slots_[p.seq_no];
          if (query.author && slot.doc->author_did.str() != *query.author) continue;
          acc.add(p.seq_no, bm25_contribution(weights.boost[f], match.scale, idf,
                                              p.term_frequency, slot.length[f],
                                              average[f]));
        }
      }
    }
  }

  std::vector<ScoredHit> ranked;
  ranked.reserve(acc.touched.size());
  for (SeqNo seq : acc.touched) ranked.push_back({seq, acc.score[seq], {}});
  result.total = ranked.size();
  const std::size_t end = std::min(ranked.size(), query.offset + query.limit);
  if (query.offset >= ranked.size()) return result;
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<long>(end),
                    ranked.end(), ranks_before);

  for (std::size_t i = query.offset; i < end; ++i) {
    ScoredHit hit = std::move(ranked[i]);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      for (const auto& match : expansions[t]) {
        if (!has_term_in_doc(terms_.find(match.term)->second.postings, hit.seq_no)) continue;
        MatchedTerm matched{tokens[t], match.term, match.distance};
        if (std::find(hit.matched_terms.begin(), hit.matched_terms.end(), matched) ==
            hit.matched_terms.end()) {
          hit.matched_terms.push_back(std::move(matched));
        }
      }
    }
    result.hits.push_back(std::move(hit));
  }
  return result;
}

bool InvertedIndex::same_contents(const InvertedIndex& other) const {
  if (docs_ != other.docs_ || total_length_ != other.total_length_ ||
      terms_.size() != other.terms_.size()) {
    return false;
  }
  for (auto a = terms_.begin(), b = other.terms_.begin(); a != terms_.end(); ++a, ++b) {
    if (a->first != b->first || a->second.postings != b->second.postings) return false;
  }
  auto bucket_terms = [](const InvertedIndex& index) {
    std::vector<std::string> out;
    for (const auto& bucket : index.buckets_) {
      for (const auto* term : bucket.terms) out.push_back(term->first);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  if (bucket_terms(*this) != bucket_terms(other)) return false;
  return stats() == other.stats();
}

void ConcurrentIndex::apply(IndexBatch batch) {
  std::lock_guard gate(turnstile_);
  std::unique_lock lock(mutex_);
  // Dry run against a membership overlay so a failing batch leaves no trace.
  std::unordered_set<SeqNo> removed;
  std::unordered_set<SeqNo> added;
  for (SeqNo seq : batch.removals) {
    if (!index_.contains(seq) || !removed.insert(seq).second) {
      throw Error(Errc::kUnknownDocument, "seqNo " + std::to_string(seq));
    }
  }
  for (const auto& doc : batch.additions) {
    const bool present = index_.contains(doc.seq_no) && !removed.contains(doc.seq_no);
    if (present || !added.insert(doc.seq_no).second) {
      throw Error(Errc::kDuplicateDocument, "seqNo " + std::to_string(doc.seq_no));
    }
  }
  for (SeqNo seq : batch.removals) index_.remove_document(seq);
  for (auto& doc : batch.additions) index_.add_document(std::move(doc));
}

void ConcurrentIndex::reset(MatchPolicy policy) {
  std::lock_guard gate(turnstile_);
  std::unique_lock lock(mutex_);
  index_ = InvertedIndex(policy);
}

SearchResult ConcurrentIndex::search(const Query& query,
                                     const FieldWeights& weights) const {
  auto lock = shared();
  return index_.search(query, weights);
}

std::uint64_t ConcurrentIndex::doc_count() const {
  auto lock = shared();
  return index_.doc_count();
}

}  // namespace credsearch
