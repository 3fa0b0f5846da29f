#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <map>
#include <random>
#include <thread>

#include "credsearch/brute_force.hpp"
#include "credsearch/enrich.hpp"
#include "credsearch/errors.hpp"
#include "credsearch/index.hpp"
#include "credsearch/ledger_sim.hpp"
#include "support.hpp"

namespace credsearch {
namespace {

EnrichedDoc make_doc(SeqNo seq, TxnType type, std::optional<std::string> name,
                     std::vector<std::string> attrs = {},
                     std::optional<std::string> alias = std::nullopt, std::string raw = "") {
  EnrichedDoc d;
  d.seq_no = seq;
  d.txn_type = type;
  d.schema_name = std::move(name);
  d.attr_names = std::move(attrs);
  d.author_alias = std::move(alias);
  d.raw = std::move(raw);
  return d;
}

Query make_query(std::string text, std::size_t limit = 10) {
  Query q;
  q.text = std::move(text);
  q.limit = limit;
  return q;
}

std::vector<SeqNo> seqs(const SearchResult& r) {
  std::vector<SeqNo> out;
  for (const auto& h : r.hits) out.push_back(h.seq_no);
  return out;
}

bool close(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

void expect_same_results(const SearchResult& a, const SearchResult& b, const std::string& what) {
  ASSERT_EQ(a.total, b.total) << what;
  ASSERT_EQ(a.hits.size(), b.hits.size()) << what;
  for (std::size_t i = 0; i < a.hits.size(); ++i) {
    ASSERT_EQ(a.hits[i].seq_no, b.hits[i].seq_no) << what << " rank " << i;
    ASSERT_TRUE(close(a.hits[i].score, b.hits[i].score))
        << what << " rank " << i << " " << a.hits[i].score << " vs " << b.hits[i].score;
    ASSERT_EQ(a.hits[i].matched_terms, b.hits[i].matched_terms) << what << " rank " << i;
  }
}

const std::vector<EnrichedDoc>& generated_docs() {
  static const std::vector<EnrichedDoc> docs =
      enrich_ledger(generate(GeneratorConfig::sized(2000, 17)).documents());
  return docs;
}

InvertedIndex build(const std::vector<EnrichedDoc>& docs, MatchPolicy policy = {}) {
  InvertedIndex index(policy);
  for (const auto& d : docs) index.add_document(d);
  return index;
}

TEST(IndexTest, EmptyIndexReturnsNothing) {
  InvertedIndex index;
  const auto r = index.search(make_query("anything"), {});
  EXPECT_EQ(r.total, 0u);
  EXPECT_TRUE(r.hits.empty());
}

TEST(IndexTest, QueryWithoutTokensIsRejected) {
  InvertedIndex index;
  for (const char* text : {"", "   ", "a b", "-"}) {
    try {
      index.search(make_query(text), {});
      ADD_FAILURE() << "accepted '" << text << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kEmptyQuery);
    }
  }
}

TEST(IndexTest, AddedDocumentIsFoundByEachOfItsTerms) {
  InvertedIndex index;
  index.add_document(make_doc(4, TxnType::kSchema, "Proof of Employment", {"company", "title"},
                              "Acme Labs", R"({"k":"zulu"})"));
  for (const char* term : {"proof", "employment", "company", "title", "acme", "labs", "zulu"}) {
    EXPECT_EQ(seqs(index.search(make_query(term), {})), std::vector<SeqNo>{4}) << term;
  }
}

TEST(IndexTest, DuplicateAndUnknownDocuments) {
  InvertedIndex index;
  index.add_document(make_doc(1, TxnType::kNym, std::nullopt));
  try {
    index.add_document(make_doc(1, TxnType::kNym, std::nullopt));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDuplicateDocument);
  }
  try {
    index.remove_document(2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnknownDocument);
  }
}

TEST(IndexTest, HandComputedBm25) {
  InvertedIndex index;
  index.add_document(make_doc(1, TxnType::kSchema, "id card"));
  index.add_document(make_doc(2, TxnType::kSchema, "proof of employment"));
  const auto r = index.search(make_query("card"), {});
  ASSERT_EQ(r.hits.size(), 1u);
  // N = 2, df = 1, schema_name lengths 2 and 3 (average 2.5), tf = 1.
  const double idf = std::log(1.0 + 1.5 / 1.5);
  const double norm = 1.2 * (0.25 + 0.75 * 2.0 / 2.5);
  EXPECT_NEAR(r.hits[0].score, 3.0 * idf * (2.2 / (1.0 + norm)), 1e-12);
  ASSERT_EQ(r.hits[0].matched_terms.size(), 1u);
  EXPECT_EQ(r.hits[0].matched_terms[0], (MatchedTerm{"card", "card", 0}));
}

TEST(IndexTest, FuzzyAndPrefixScaling) {
  InvertedIndex index;
  index.add_document(make_doc(1, TxnType::kSchema, "windley"));
  index.add_document(make_doc(2, TxnType::kSchema, "employment"));
  index.add_document(make_doc(3, TxnType::kSchema, "other"));
  const double exact = index.search(make_query("windley"), {}).hits.at(0).score;
  const auto fuzzy = index.search(make_query("wimdley"), {});
  ASSERT_EQ(seqs(fuzzy), std::vector<SeqNo>{1});
  EXPECT_NEAR(fuzzy.hits[0].score, exact * 2.0 / 3.0, 1e-12);
  EXPECT_EQ(fuzzy.hits[0].matched_terms[0], (MatchedTerm{"wimdley", "windley", 1}));

  const double full = index.search(make_query("employment"), {}).hits.at(0).score;
  const auto prefix = index.search(make_query("employ"), {});
  ASSERT_EQ(seqs(prefix), std::vector<SeqNo>{2});
  EXPECT_NEAR(prefix.hits[0].score, full * 0.5, 1e-12);
}

TEST(IndexTest, ExpandTermExamples) {
  InvertedIndex index;
  index.add_document(make_doc(1, TxnType::kNym, std::nullopt, {}, "Phil Windley"));
  index.add_document(make_doc(2, TxnType::kSchema, "id card", {"employment", "idea"}));
  const auto wimdley = index.expand_term("wimdley");
  ASSERT_EQ(wimdley.size(), 1u);
  EXPECT_EQ(wimdley[0].term, "windley");
  EXPECT_EQ(wimdley[0].distance, 1u);
  EXPECT_NEAR(wimdley[0].scale, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(index.expand_term("id"), (std::vector<TermMatch>{{"id", 0, 1.0}}));
  const auto employ = index.expand_term("employ");
  ASSERT_EQ(employ.size(), 1u);
  EXPECT_EQ(employ[0].term, "employment");
  EXPECT_EQ(employ[0].scale, 0.5);
  EXPECT_TRUE(index.expand_term("zzzzzz").empty());
}

TEST(IndexTest, TypeFilterKeepsJoinedClaimDefsAboveRawOnlyMatches) {
  InvertedIndex index;
  index.add_document(make_doc(1, TxnType::kSchema, "ID card", {"name"}));
  index.add_document(make_doc(2, TxnType::kClaimDef, "ID card", {"name"}));
  index.add_document(make_doc(3, TxnType::kClaimDef, "ID card", {"name", "date_of_birth"}));
  index.add_document(
      make_doc(4, TxnType::kClaimDef, "Library card", {"name"}, std::nullopt, R"({"tag":"id"})"));
  index.add_document(make_doc(5, TxnType::kClaimDef, std::nullopt, {}, std::nullopt,
                              R"({"note":"id card"})"));
  Query q = make_query("id card");
  q.type_filter = std::set<TxnType>{TxnType::kClaimDef};
  const auto r = index.search(q, {});
  for (const auto& h : r.hits) EXPECT_NE(h.seq_no, 1u);
  ASSERT_EQ(seqs(r), (std::vector<SeqNo>{2, 3, 4, 5}));
  const double raw_only = r.hits.back().score;
  EXPECT_GT(r.hits[0].score, raw_only);
  EXPECT_GT(r.hits[1].score, raw_only);
  expect_same_results(r, BruteForceCorpus({make_doc(1, TxnType::kSchema, "ID card", {"name"}),
                                           make_doc(2, TxnType::kClaimDef, "ID card", {"name"}),
                                           make_doc(3, TxnType::kClaimDef, "ID card",
                                                    {"name", "date_of_birth"}),
                                           make_doc(4, TxnType::kClaimDef, "Library card",
                                                    {"name"}, std::nullopt, R"({"tag":"id"})"),
                                           make_doc(5, TxnType::kClaimDef, std::nullopt, {},
                                                    std::nullopt, R"({"note":"id card"})")})
                             .search(q, {}),
                      "filter");
}

TEST(IndexTest, EqualScoresTieBreakOnSeqNo) {
  InvertedIndex index;
  for (SeqNo s : {9, 3, 7, 1, 5}) index.add_document(make_doc(s, TxnType::kSchema, "same name"));
  EXPECT_EQ(seqs(index.search(make_query("same"), {})), (std::vector<SeqNo>{1, 3, 5, 7, 9}));
}

TEST(IndexTest, PaginationWindows) {
  InvertedIndex index;
  for (SeqNo s = 1; s <= 30; ++s) index.add_document(make_doc(s, TxnType::kSchema, "alpha"));
  Query q = make_query("alpha", 7);
  q.offset = 25;
  const auto r = index.search(q, {});
  EXPECT_EQ(r.total, 30u);
  EXPECT_EQ(seqs(r), (std::vector<SeqNo>{26, 27, 28, 29, 30}));
  q.offset = 40;
  EXPECT_TRUE(index.search(q, {}).hits.empty());
  q.limit = 0;
  EXPECT_THROW(index.search(q, {}), Error);
}

TEST(IndexTest, AuthorFilter) {
  InvertedIndex index;
  EnrichedDoc a = make_doc(1, TxnType::kSchema, "alpha");
  a.author_did = Did::from("V4SGRU86Z58d6TV7PBUe6f");
  EnrichedDoc b = make_doc(2, TxnType::kSchema, "alpha");
  b.author_did = Did::from("Th7MpTaRZVRYnPiabds81Y");
  index.add_document(a);
  index.add_document(b);
  Query q = make_query("alpha");
  q.author = "Th7MpTaRZVRYnPiabds81Y";
  EXPECT_EQ(seqs(index.search(q, {})), std::vector<SeqNo>{2});
}

// Statistics recomputed from the documents with a tokenizer written here.
std::vector<std::string> simple_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::array<std::vector<std::string>, kFieldCount> simple_fields(const EnrichedDoc& d) {
  std::array<std::vector<std::string>, kFieldCount> f;
  auto add = [&](Field field, const std::string& text) {
    auto t = simple_tokens(text);
    auto& dst = f[field_index(field)];
    dst.insert(dst.end(), t.begin(), t.end());
  };
  if (d.schema_name) add(Field::kSchemaName, *d.schema_name);
  for (const auto& a : d.attr_names) add(Field::kAttrNames, a);
  if (d.author_alias) add(Field::kAuthorAlias, *d.author_alias);
  if (d.schema_version) add(Field::kSchemaVersion, *d.schema_version);
  add(Field::kRawText, d.raw);
  return f;
}

TEST(IndexTest, StatisticsMatchDirectRecomputation) {
  const auto& docs = generated_docs();
  ASSERT_GE(docs.size(), 1500u);
  const InvertedIndex index = build(docs);
  const IndexStats stats = index.stats();
  EXPECT_EQ(stats.doc_count, docs.size());
  std::array<std::uint64_t, kFieldCount> total{};
  for (const auto& d : docs) {
    const auto f = simple_fields(d);
    for (std::size_t i = 0; i < kFieldCount; ++i) total[i] += f[i].size();
  }
  for (std::size_t i = 0; i < kFieldCount; ++i) {
    EXPECT_EQ(stats.total_length[i], total[i]) << i;
    EXPECT_DOUBLE_EQ(stats.average_length[i],
                     static_cast<double>(total[i]) / static_cast<double>(docs.size()));
  }
}

TEST(IndexTest, TermFrequenciesSumToFieldLengths) {
  const auto& docs = generated_docs();
  const InvertedIndex index = build(docs);
  for (std::size_t k = 0; k < docs.size(); k += 13) {
    const EnrichedDoc& d = docs[k];
    const auto f = simple_fields(d);
    for (std::size_t field = 0; field < kFieldCount; ++field) {
      std::map<std::string, std::uint32_t> counts;
      for (const auto& t : f[field]) ++counts[t];
      std::uint64_t sum = 0;
      for (const auto& [term, count] : counts) {
        const PostingList* list = index.postings(term);
        ASSERT_NE(list, nullptr) << term;
        const auto& postings = list->by_field[field];
        ASSERT_TRUE(std::is_sorted(postings.begin(), postings.end(),
                                   [](const Posting& a, const Posting& b) {
                                     return a.seq_no < b.seq_no;
                                   }));
        auto it = std::find_if(postings.begin(), postings.end(),
                               [&](const Posting& p) { return p.seq_no == d.seq_no; });
        ASSERT_NE(it, postings.end());
        EXPECT_EQ(it->term_frequency, count);
        sum += it->term_frequency;
      }
      EXPECT_EQ(sum, f[field].size());
    }
  }
}

TEST(IndexTest, RemoveIsTheInverseOfAdd) {
  const auto& docs = generated_docs();
  std::vector<EnrichedDoc> base(docs.begin(), docs.begin() + 300);
  InvertedIndex index = build(base);
  const InvertedIndex reference = build(base);
  std::mt19937_64 rng(5);
  for (int round = 0; round < 40; ++round) {
    const EnrichedDoc& extra = docs[300 + rng() % (docs.size() - 300)];
    if (index.contains(extra.seq_no)) continue;
    const auto before = index.search(make_query("proof employment"), {});
    index.add_document(extra);
    index.remove_document(extra.seq_no);
    ASSERT_TRUE(index.same_contents(reference));
    ASSERT_EQ(index.stats(), reference.stats());
    expect_same_results(index.search(make_query("proof employment"), {}), before, "inverse");
  }
}

TEST(IndexTest, RemovedDocumentNoLongerMatches) {
  InvertedIndex index;
  index.add_document(make_doc(1, TxnType::kSchema, "xylophone"));
  index.add_document(make_doc(2, TxnType::kSchema, "trumpet"));
  index.remove_document(1);
  EXPECT_TRUE(index.search(make_query("xylophone"), {}).hits.empty());
  EXPECT_EQ(index.postings("xylophone"), nullptr);
  EXPECT_EQ(seqs(index.search(make_query("trumpet"), {})), std::vector<SeqNo>{2});
}

TEST(IndexTest, IncrementalAndRebuiltIndexesAgree) {
  const auto& docs = generated_docs();
  InvertedIndex incremental;
  std::vector<EnrichedDoc> shuffled(docs.begin(), docs.begin() + 600);
  std::mt19937_64 rng(9);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  for (const auto& d : shuffled) incremental.add_document(d);
  for (std::size_t i = 0; i < 100; ++i) incremental.remove_document(shuffled[i].seq_no);
  for (std::size_t i = 0; i < 100; ++i) incremental.add_document(shuffled[i]);
  const InvertedIndex rebuilt = build({docs.begin(), docs.begin() + 600});
  EXPECT_TRUE(incremental.same_contents(rebuilt));
  for (const char* text : {"proof of employment", "wimdley", "credit union", "employ"}) {
    expect_same_results(incremental.search(make_query(text, 50), {}),
                        rebuilt.search(make_query(text, 50), {}), text);
  }
}

std::string typo(std::string word, std::mt19937_64& rng) {
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  const std::size_t pos = rng() % word.size();
  switch (rng() % 4) {
    case 0: word[pos] = alphabet[rng() % alphabet.size()]; break;
    case 1: if (word.size() > 1) word.erase(pos, 1); break;
    case 2: word.insert(word.begin() + pos, alphabet[rng() % alphabet.size()]); break;
    default:
      if (pos + 1 < word.size()) std::swap(word[pos], word[pos + 1]);
  }
  return word;
}

TEST(IndexTest, MatchesBruteForceOnRandomQueries) {
  const auto& all = generated_docs();
  std::mt19937_64 rng(21);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < all.size(); i += 7) {
    const auto f = simple_fields(all[i]);
    for (std::size_t field = 0; field < 4; ++field) {
      words.insert(words.end(), f[field].begin(), f[field].end());
    }
  }
  for (int round = 0; round < 20; ++round) {
    const std::size_t n = 50 + rng() % 400;
    std::vector<EnrichedDoc> docs(all.begin(), all.begin() + n);
    const InvertedIndex index = build(docs);
    const BruteForceCorpus oracle(docs);
    for (int k = 0; k < 10; ++k) {
      std::string text;
      for (std::size_t w = 1 + rng() % 3; w > 0; --w) {
        std::string word = words[rng() % words.size()];
        if (rng() % 2 == 0) word = typo(word, rng);
        if (rng() % 5 == 0 && word.size() > 3) word.resize(word.size() - 2);
        text += word + " ";
      }
      Query q = make_query(text, 1 + rng() % 30);
      q.offset = rng() % 3 == 0 ? rng() % 10 : 0;
      if (rng() % 3 == 0) q.type_filter = std::set<TxnType>{TxnType::kClaimDef};
      expect_same_results(index.search(q, {}), oracle.search(q, {}), text);
    }
  }
}

TEST(IndexTest, TypoGuaranteeForAliasTerms) {
  const auto& docs = generated_docs();
  const InvertedIndex index = build(docs);
  const InvertedIndex no_short_circuit = build(docs, MatchPolicy{false, true});
  std::map<std::string, SeqNo> alias_terms;
  for (const auto& d : docs) {
    if (!d.author_alias) continue;
    for (const auto& t : simple_tokens(*d.author_alias)) {
      if (t.size() >= 5) alias_terms.emplace(t, d.seq_no);
    }
  }
  ASSERT_GE(alias_terms.size(), 10u);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  auto retrieves = [](const InvertedIndex& idx, const std::string& variant, SeqNo seq) {
    Query q = make_query(variant, 1000);
    for (const auto& h : idx.search(q, {}).hits) {
      if (h.seq_no == seq) return true;
    }
    return false;
  };
  std::size_t checked = 0;
  std::size_t collisions = 0;
  std::size_t term_no = 0;
  for (const auto& [term, seq] : alias_terms) {
    if (term_no++ % 3 != 0) continue;
    std::set<std::string> variants;
    for (std::size_t i = 0; i < term.size(); ++i) {
      variants.insert(term.substr(0, i) + term.substr(i + 1));
      if (i + 1 < term.size()) {
        std::string t = term;
        std::swap(t[i], t[i + 1]);
        variants.insert(t);
      }
      for (char c : alphabet) {
        std::string sub = term;
        sub[i] = c;
        variants.insert(sub);
      }
    }
    for (std::size_t i = 0; i <= term.size(); ++i) {
      for (char c : alphabet) variants.insert(term.substr(0, i) + c + term.substr(i));
    }
    variants.erase(term);
    for (const auto& v : variants) {
      ASSERT_TRUE(retrieves(no_short_circuit, v, seq)) << term << " -> " << v;
      // With the exact-match short circuit a variant that is itself an
      // indexed term resolves to that term only.
      if (index.postings(v) != nullptr) {
        ++collisions;
        continue;
      }
      ASSERT_TRUE(retrieves(index, v, seq)) << term << " -> " << v;
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000u);
  RecordProperty("variant_collisions", static_cast<int>(collisions));
}

TEST(IndexTest, AddingANonMatchingDocumentKeepsPreviousMatches) {
  const auto& docs = generated_docs();
  InvertedIndex index = build({docs.begin(), docs.begin() + 200});
  const Query q = make_query("proof employment", 1000);
  const auto before = index.search(q, {});
  index.add_document(make_doc(100000, TxnType::kNym, std::nullopt, {}, std::nullopt, "{}"));
  const auto after = index.search(q, {});
  std::set<SeqNo> after_set;
  for (const auto& h : after.hits) after_set.insert(h.seq_no);
  for (const auto& h : before.hits) EXPECT_TRUE(after_set.count(h.seq_no));
  EXPECT_FALSE(after_set.count(100000));
}

TEST(IndexTest, SearchIsDeterministic) {
  const auto& docs = generated_docs();
  const InvertedIndex a = build(docs);
  const InvertedIndex b = build(docs);
  for (const char* text : {"id card", "phil wimdley", "university degree"}) {
    expect_same_results(a.search(make_query(text), {}), a.search(make_query(text), {}), text);
    expect_same_results(a.search(make_query(text), {}), b.search(make_query(text), {}), text);
  }
}

TEST(ConcurrentIndexTest, ReadersSeeWholeBatches) {
  ConcurrentIndex index;
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::atomic<int> reads{0};
  std::vector<std::thread> readers;
  for (int r = 0; r < 3; ++r) {
    readers.emplace_back([&] {
      while (!done) {
        try {
          const auto res = index.search(make_query("batchterm", 1), {});
          if (res.total % 10 != 0) ++bad;
        } catch (const Error&) {
          ++bad;
        }
        ++reads;
      }
    });
  }
  while (reads.load() == 0) std::this_thread::yield();
  for (SeqNo batch = 0; batch < 100; ++batch) {
    std::this_thread::yield();
    IndexBatch b;
    for (SeqNo i = 0; i < 10; ++i) {
      b.additions.push_back(make_doc(batch * 10 + i + 1, TxnType::kSchema, "batchterm"));
    }
    index.apply(std::move(b));
  }
  done = true;
  for (auto& t : readers) t.join();
  EXPECT_EQ(bad.load(), 0);
  EXPECT_GT(reads.load(), 0);
  EXPECT_EQ(index.doc_count(), 1000u);
}

TEST(ConcurrentIndexTest, FailedBatchLeavesIndexUnchanged) {
  ConcurrentIndex index;
  index.apply({{}, {make_doc(1, TxnType::kSchema, "one")}});
  IndexBatch bad;
  bad.additions = {make_doc(2, TxnType::kSchema, "two"), make_doc(1, TxnType::kSchema, "dup")};
  EXPECT_THROW(index.apply(std::move(bad)), Error);
  EXPECT_EQ(index.doc_count(), 1u);
  EXPECT_TRUE(index.search(make_query("two"), {}).hits.empty());
  EXPECT_EQ(seqs(index.search(make_query("one"), {})), std::vector<SeqNo>{1});
}

TEST(ConcurrentIndexTest, BatchReplacesDocuments) {
  ConcurrentIndex index;
  index.apply({{}, {make_doc(1, TxnType::kSchema, "old", {}, "Old Alias")}});
  index.apply({{1}, {make_doc(1, TxnType::kSchema, "old", {}, "New Alias")}});
  EXPECT_EQ(index.doc_count(), 1u);
  EXPECT_EQ(seqs(index.search(make_query("new"), {})), std::vector<SeqNo>{1});
  // "old" still matches via the schema name, but not via the alias.
  const auto r = index.search(make_query("old"), {});
  ASSERT_EQ(r.hits.size(), 1u);
  for (const auto& m : r.hits[0].matched_terms) EXPECT_EQ(m.index_term, "old");
}

TEST(BruteForceTest, EmptyCorpusAndSingleDocument) {
  EXPECT_TRUE(brute_force_search({}, make_query("anything"), {}).hits.empty());
  const auto doc = make_doc(1, TxnType::kSchema, "single doc", {"name"});
  InvertedIndex index;
  index.add_document(doc);
  const auto a = brute_force_search({doc}, make_query("single"), {});
  ASSERT_EQ(a.hits.size(), 1u);
  EXPECT_EQ(a.hits[0].score, index.search(make_query("single"), {}).hits[0].score);
}

TEST(BruteForceTest, ExpandTermMatchesIndex) {
  const auto& docs = generated_docs();
  std::vector<EnrichedDoc> subset(docs.begin(), docs.begin() + 300);
  const InvertedIndex index = build(subset);
  const BruteForceCorpus oracle(subset);
  for (const char* t : {"wimdley", "id", "employ", "proof", "credt", "unoin", "zq"}) {
    EXPECT_EQ(index.expand_term(t), oracle.expand_term(t)) << t;
  }
}

}  // namespace
}  // namespace credsearch
