#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "credsearch/enrich.hpp"
#include "credsearch/errors.hpp"
#include "credsearch/ledger_sim.hpp"
#include "credsearch/ledger_source.hpp"
#include "credsearch/ledger_store.hpp"
#include "credsearch/sync.hpp"
#include "support.hpp"

namespace credsearch {
namespace {

using testing::FakeSource;
using testing::TempDir;
namespace fs = std::filesystem;

Errc error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kNonZeroErrorRate;
}

std::vector<TxnEnvelope> envelopes(const std::vector<std::string>& docs, std::size_t from,
                                   std::size_t count) {
  std::vector<TxnEnvelope> out;
  for (std::size_t i = from; i < from + count && i < docs.size(); ++i) {
    out.push_back(parse_txn(docs[i]));
  }
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << body;
}

TEST(LedgerStoreTest, AppendAndReopen) {
  TempDir dir;
  const std::vector<std::string> lines = {R"({"a":1})", R"({"b":2})"};
  {
    LedgerStore store(dir.path());
    EXPECT_EQ(store.checkpoint().last_seq, 0u);
    EXPECT_TRUE(store.load().empty());
    store.append(lines, merkle_root(lines));
  }
  LedgerStore reopened(dir.path());
  EXPECT_EQ(reopened.checkpoint().last_seq, 2u);
  EXPECT_EQ(reopened.checkpoint().root, merkle_root(lines));
  EXPECT_EQ(reopened.load(), lines);
  EXPECT_EQ(read_file(reopened.ledger_path()), "{\"a\":1}\n{\"b\":2}\n");
}

TEST(LedgerStoreTest, BytesPastTheCheckpointAreDiscarded) {
  TempDir dir;
  const std::vector<std::string> lines = {R"({"a":1})"};
  {
    LedgerStore store(dir.path());
    store.append(lines, merkle_root(lines));
  }
  {
    std::ofstream out(dir / "ledger.ndjson", std::ios::app | std::ios::binary);
    out << "{\"half\":";
  }
  LedgerStore reopened(dir.path());
  EXPECT_EQ(reopened.load(), lines);
  EXPECT_EQ(read_file(reopened.ledger_path()), "{\"a\":1}\n");
}

TEST(LedgerStoreTest, ShortLedgerFileIsAVerificationFailure) {
  TempDir dir;
  const std::vector<std::string> lines = {R"({"a":1})", R"({"b":2})"};
  {
    LedgerStore store(dir.path());
    store.append(lines, merkle_root(lines));
  }
  write_file(dir / "ledger.ndjson", "{\"a\":1}\n");
  EXPECT_EQ(error_of([&] { LedgerStore s(dir.path()); }), Errc::kVerificationFailure);
}

TEST(LedgerStoreTest, CorruptCheckpointIsAVerificationFailure) {
  TempDir dir;
  { LedgerStore store(dir.path()); store.append(std::vector<std::string>{"{}"}, hash_leaf("{}")); }
  write_file(dir / "checkpoint.json", "{\"last_seq\":");
  EXPECT_EQ(error_of([&] { LedgerStore s(dir.path()); }), Errc::kVerificationFailure);
}

TEST(LedgerStoreTest, FailedCheckpointRollsTheFileBack) {
  TempDir dir;
  const std::vector<std::string> first = {R"({"a":1})"};
  LedgerStore store(dir.path());
  store.append(first, merkle_root(first));
  // A directory where the temporary checkpoint should go makes the write fail.
  fs::create_directory(dir / "checkpoint.json.tmp");
  const std::vector<std::string> second = {R"({"b":2})"};
  EXPECT_EQ(error_of([&] { store.append(second, hash_leaf("x")); }), Errc::kPersistenceFailure);
  EXPECT_EQ(store.checkpoint().last_seq, 1u);
  EXPECT_EQ(read_file(store.ledger_path()), "{\"a\":1}\n");
  fs::remove(dir / "checkpoint.json.tmp");
  LedgerStore reopened(dir.path());
  EXPECT_EQ(reopened.load(), first);
}

class LedgerCopyTest : public ::testing::Test {
 protected:
  SimLedger ledger_ = testing::small_ledger();
  TempDir dir_;
};

TEST_F(LedgerCopyTest, IngestReproducesTheSourceRoot) {
  const SimLedger ledger = generate(GeneratorConfig::sized(100, 3));
  LedgerCopy copy(dir_.path());
  for (std::size_t i = 0; i < ledger.size(); i += 17) {
    copy.verify_and_append(envelopes(ledger.documents(), i, 17));
  }
  EXPECT_EQ(copy.size(), 100u);
  EXPECT_EQ(copy.root(), ledger.root());
  LedgerCopy reopened(dir_.path());
  EXPECT_EQ(reopened.root(), ledger.root());
  EXPECT_EQ(reopened.documents(), ledger.documents());
}

TEST_F(LedgerCopyTest, EmptyBatchChangesNothing) {
  LedgerCopy copy(dir_.path());
  copy.verify_and_append(envelopes(ledger_.documents(), 0, 3));
  const Digest root = copy.root();
  copy.verify_and_append({});
  EXPECT_EQ(copy.size(), 3u);
  EXPECT_EQ(copy.root(), root);
}

TEST_F(LedgerCopyTest, SkippingASequenceNumberIsRejected) {
  LedgerCopy copy(dir_.path());
  copy.verify_and_append(envelopes(ledger_.documents(), 0, 3));
  EXPECT_EQ(error_of([&] { copy.verify_and_append(envelopes(ledger_.documents(), 4, 2)); }),
            Errc::kSequenceMismatch);
  EXPECT_EQ(copy.size(), 3u);
}

TEST_F(LedgerCopyTest, PersistenceFailureKeepsTheLastDurableState) {
  LedgerCopy copy(dir_.path());
  copy.verify_and_append(envelopes(ledger_.documents(), 0, 5));
  const Digest root = copy.root();
  fs::create_directory(dir_ / "checkpoint.json.tmp");
  EXPECT_EQ(error_of([&] { copy.verify_and_append(envelopes(ledger_.documents(), 5, 5)); }),
            Errc::kPersistenceFailure);
  EXPECT_EQ(copy.size(), 5u);
  EXPECT_EQ(copy.root(), root);
  fs::remove(dir_ / "checkpoint.json.tmp");
  copy.verify_and_append(envelopes(ledger_.documents(), 5, 5));
  EXPECT_EQ(copy.root(), ledger_.tree().root_at(10));
}

TEST_F(LedgerCopyTest, InclusionPathsVerify) {
  LedgerCopy copy(dir_.path());
  copy.verify_and_append(envelopes(ledger_.documents(), 0, ledger_.size()));
  for (SeqNo s = 1; s <= copy.size(); ++s) {
    const Inclusion inc = copy.inclusion(s);
    EXPECT_TRUE(verify_audit(*copy.document(s), s - 1, inc.tree_size, inc.path, copy.root()));
  }
  EXPECT_EQ(error_of([&] { copy.inclusion(0); }), Errc::kIndexOutOfRange);
  EXPECT_EQ(error_of([&] { copy.inclusion(copy.size() + 1); }), Errc::kIndexOutOfRange);
  EXPECT_FALSE(copy.document(0).has_value());
}

TEST_F(LedgerCopyTest, StoredNonCanonicalInputIsCanonicalized) {
  LedgerCopy copy(dir_.path());
  const std::string pretty = nlohmann::json::parse(ledger_.documents()[0]).dump(2);
  copy.verify_and_append(std::vector<TxnEnvelope>{parse_txn(pretty)});
  EXPECT_EQ(copy.document(1), ledger_.documents()[0]);
}

TEST_F(LedgerCopyTest, EveryTamperedByteIsDetectedOnReopen) {
  {
    LedgerCopy copy(dir_.path());
    copy.verify_and_append(envelopes(ledger_.documents(), 0, 12));
  }
  const fs::path file = dir_ / "ledger.ndjson";
  const std::string original = read_file(file);
  for (std::size_t pos = 0; pos < original.size(); pos += 7) {
    std::string tampered = original;
    tampered[pos] = static_cast<char>(tampered[pos] ^ 0x01);
    write_file(file, tampered);
    ASSERT_EQ(error_of([&] { LedgerCopy c(dir_.path()); }), Errc::kVerificationFailure)
        << "byte " << pos;
  }
  write_file(file, original);
  EXPECT_NO_THROW(LedgerCopy c(dir_.path()));
}

TEST(FetchRangeTest, AgainstTheSimulator) {
  GeneratorConfig config = GeneratorConfig::sized(3, 1);
  SimServer server(generate(config), {});
  server.start("127.0.0.1", 0);
  HttpLedgerSource source(server.base_url());
  const FetchResult all = fetch_range(source, 1, 3);
  ASSERT_EQ(all.envelopes.size(), 3u);
  for (SeqNo s = 1; s <= 3; ++s) EXPECT_EQ(all.envelopes[s - 1].seq_no, s);
  const FetchResult beyond = fetch_range(source, 10, 20);
  EXPECT_TRUE(beyond.envelopes.empty());
  EXPECT_EQ(beyond.head, 3u);
  const FetchResult partial = fetch_range(source, 2, 50);
  EXPECT_EQ(partial.envelopes.size(), 2u);
  EXPECT_EQ(source.head().size, 3u);
  EXPECT_EQ(source.head().root, server.root());
  server.stop();
}

TEST(FetchRangeTest, FollowsTheServerBatchCap) {
  const SimLedger ledger = testing::small_ledger();
  SimServerOptions options;
  options.max_batch = 4;
  SimServer server(ledger, options);
  server.start("127.0.0.1", 0);
  HttpLedgerSource source(server.base_url());
  const FetchResult r = fetch_range(source, 1, ledger.size());
  ASSERT_EQ(r.envelopes.size(), ledger.size());
  EXPECT_EQ(r.envelopes.back().seq_no, ledger.size());
  server.stop();
}

TEST(FetchRangeTest, NonContiguousReplyIsAGap) {
  const SimLedger ledger = testing::small_ledger();
  auto state = std::make_shared<FakeSource::State>();
  state->docs = ledger.documents();
  state->fetch_override = {ledger.documents()[0], ledger.documents()[2]};
  FakeSource source(state);
  EXPECT_EQ(error_of([&] { fetch_range(source, 1, 3); }), Errc::kGapDetected);
}

TEST(HttpLedgerSourceTest, UnreachableSourceFailsAfterRetries) {
  RetryPolicy retry;
  retry.base_delay = std::chrono::milliseconds(5);
  retry.max_attempts = 3;
  // Port 1 on loopback refuses connections.
  HttpLedgerSource source("http://127.0.0.1:1", retry);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(error_of([&] { source.head(); }), Errc::kSourceUnavailable);
  // Two waits of 5 ms and 10 ms between the three attempts.
  EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(15));
}

class SyncServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    state_ = std::make_shared<FakeSource::State>();
    ledger_ = testing::small_ledger();
  }

  std::unique_ptr<SyncService> make(std::uint64_t batch = 1000) {
    SyncConfig config;
    config.data_dir = dir_.path();
    config.batch_size = batch;
    config.poll_interval = std::chrono::milliseconds(20);
    return std::make_unique<SyncService>(config, std::make_unique<FakeSource>(state_));
  }

  static void catch_up(SyncService& s) {
    while (s.run_cycle()) {
    }
  }

  void serve(std::size_t n) {
    std::lock_guard lock(state_->mutex);
    state_->docs.assign(ledger_.documents().begin(), ledger_.documents().begin() + n);
  }

  std::shared_ptr<FakeSource::State> state_;
  SimLedger ledger_;
  TempDir dir_;
};

TEST_F(SyncServiceTest, ZeroBatchSizeIsInvalid) {
  EXPECT_EQ(error_of([&] { make(0); }), Errc::kInvalidConfig);
}

TEST_F(SyncServiceTest, EmptySourceIdlesAtZero) {
  auto sync = make();
  EXPECT_FALSE(sync->run_cycle());
  const SyncStats s = sync->stats();
  EXPECT_EQ(s.last_seq, 0u);
  EXPECT_EQ(s.root, empty_root());
  EXPECT_EQ(s.phase, SyncPhase::kSteady);
}

TEST_F(SyncServiceTest, CatchesUpInBatchesAndReachesSteadyState) {
  serve(ledger_.size());
  auto sync = make(5);
  EXPECT_TRUE(sync->run_cycle());
  EXPECT_EQ(sync->phase(), SyncPhase::kCatchingUp);
  EXPECT_EQ(sync->stats().last_seq, 5u);
  catch_up(*sync);
  sync->run_cycle();
  const SyncStats s = sync->stats();
  EXPECT_EQ(s.last_seq, ledger_.size());
  EXPECT_EQ(s.root, ledger_.root());
  EXPECT_EQ(s.doc_count, ledger_.size());
  EXPECT_EQ(s.source_size, ledger_.size());
  EXPECT_EQ(s.phase, SyncPhase::kSteady);
  EXPECT_EQ(s.source_url, "fake://ledger");
}

TEST_F(SyncServiceTest, IncrementalIndexEqualsRebuild) {
  serve(ledger_.size());
  auto sync = make(3);
  catch_up(*sync);
  InvertedIndex rebuilt;
  for (auto& d : enrich_ledger(ledger_.documents())) rebuilt.add_document(d);
  EXPECT_TRUE(sync->index().read(
      [&](const InvertedIndex& idx) { return idx.same_contents(rebuilt); }));
}

TEST_F(SyncServiceTest, RestartRebuildsTheSameState) {
  serve(ledger_.size());
  SyncStats before;
  {
    auto sync = make(4);
    catch_up(*sync);
    before = sync->stats();
  }
  auto again = make();
  again->open();
  const SyncStats after = again->stats();
  EXPECT_EQ(after.last_seq, before.last_seq);
  EXPECT_EQ(after.root, before.root);
  EXPECT_EQ(after.doc_count, before.doc_count);
  EXPECT_NE(again->phase(), SyncPhase::kFatal);
}

TEST_F(SyncServiceTest, SourceOutageIsRetriedNextCycle) {
  serve(10);
  auto sync = make();
  state_->fail_next = 1;
  EXPECT_FALSE(sync->run_cycle());
  EXPECT_NE(sync->phase(), SyncPhase::kFatal);
  EXPECT_EQ(sync->stats().last_seq, 0u);
  catch_up(*sync);
  EXPECT_EQ(sync->stats().last_seq, 10u);
}

TEST_F(SyncServiceTest, GapIsRetriedNextCycle) {
  serve(10);
  state_->fetch_override = {ledger_.documents()[0], ledger_.documents()[2]};
  auto sync = make();
  EXPECT_FALSE(sync->run_cycle());
  EXPECT_NE(sync->phase(), SyncPhase::kFatal);
  state_->fetch_override.clear();
  catch_up(*sync);
  EXPECT_EQ(sync->stats().last_seq, 10u);
}

TEST_F(SyncServiceTest, ShrinkingSourceIsFatal) {
  serve(10);
  auto sync = make();
  catch_up(*sync);
  serve(8);
  sync->run_cycle();
  EXPECT_EQ(sync->phase(), SyncPhase::kFatal);
  EXPECT_FALSE(sync->stats().fatal_reason.empty());
  serve(12);
  EXPECT_FALSE(sync->run_cycle());
  EXPECT_EQ(sync->stats().last_seq, 10u);
}

TEST_F(SyncServiceTest, RewrittenTransactionAtEqualSizeIsFatal) {
  serve(10);
  auto sync = make();
  catch_up(*sync);
  sync->run_cycle();
  {
    std::lock_guard lock(state_->mutex);
    auto doc = nlohmann::json::parse(state_->docs[4]);
    doc["txn"]["metadata"]["reqId"] = 1;
    state_->docs[4] = doc.dump();
  }
  sync->run_cycle();
  EXPECT_EQ(sync->phase(), SyncPhase::kFatal);
}

TEST_F(SyncServiceTest, RewrittenHistoryFailsTheConsistencyProof) {
  serve(10);
  auto sync = make();
  catch_up(*sync);
  serve(15);
  {
    std::lock_guard lock(state_->mutex);
    auto doc = nlohmann::json::parse(state_->docs[2]);
    doc["txn"]["metadata"]["reqId"] = 1;
    state_->docs[2] = doc.dump();
  }
  sync->run_cycle();
  EXPECT_EQ(sync->phase(), SyncPhase::kFatal);
  EXPECT_EQ(sync->stats().last_seq, 10u);
}

TEST_F(SyncServiceTest, SourceRootMismatchAfterFetchIsFatal) {
  serve(10);
  state_->serve_proofs = false;
  auto sync = make();
  catch_up(*sync);
  serve(12);
  {
    std::lock_guard lock(state_->mutex);
    auto doc = nlohmann::json::parse(state_->docs[1]);
    doc["txn"]["metadata"]["reqId"] = 1;
    state_->docs[1] = doc.dump();
  }
  sync->run_cycle();
  EXPECT_EQ(sync->phase(), SyncPhase::kFatal);
}

TEST_F(SyncServiceTest, TamperedLocalCopyIsFatalOnOpen) {
  serve(10);
  {
    auto sync = make();
    catch_up(*sync);
  }
  std::string body = read_file(dir_ / "ledger.ndjson");
  body[body.size() / 2] = static_cast<char>(body[body.size() / 2] ^ 0x20);
  write_file(dir_ / "ledger.ndjson", body);
  auto sync = make();
  sync->open();
  EXPECT_EQ(sync->phase(), SyncPhase::kFatal);
  EXPECT_EQ(sync->ledger(), nullptr);
  EXPECT_FALSE(sync->run_cycle());
}

TEST_F(SyncServiceTest, UnclassifiableTransactionIsStoredButNotIndexed) {
  std::vector<std::string> docs = {ledger_.documents()[0]};
  auto bad = nlohmann::json::parse(
      make_schema_txn(2, ledger_.envelope(1).author_did, "x", "1.0", {"a"}, 1));
  bad["txn"]["data"]["data"].erase("name");
  docs.push_back(bad.dump());
  {
    std::lock_guard lock(state_->mutex);
    state_->docs = docs;
  }
  auto sync = make();
  catch_up(*sync);
  const SyncStats s = sync->stats();
  EXPECT_EQ(s.last_seq, 2u);
  EXPECT_EQ(s.doc_count, 1u);
  EXPECT_EQ(s.root, merkle_root(docs));
  EXPECT_NE(s.phase, SyncPhase::kFatal);
}

TEST_F(SyncServiceTest, BackgroundLoopPicksUpAppends) {
  serve(5);
  auto sync = make();
  sync->start();
  ASSERT_TRUE(sync->wait_for_seq(5, std::chrono::seconds(5)));
  serve(9);
  sync->poke();
  ASSERT_TRUE(sync->wait_for_seq(9, std::chrono::seconds(5)));
  EXPECT_FALSE(sync->wait_for_seq(100, std::chrono::milliseconds(50)));
  sync->stop();
  EXPECT_EQ(sync->stats().root, ledger_.tree().root_at(9));
}

TEST_F(SyncServiceTest, AliasUpdateReachesEarlierDocumentsThroughSync) {
  const Did org = ledger_.envelope(1).author_did;
  std::vector<std::string> docs = {
      make_nym_txn(1, org, org, "Before Rename", 1),
      make_schema_txn(2, org, "Diploma", "1.0", {"degree"}, 2),
  };
  {
    std::lock_guard lock(state_->mutex);
    state_->docs = docs;
  }
  auto sync = make();
  catch_up(*sync);
  {
    std::lock_guard lock(state_->mutex);
    state_->docs.push_back(make_nym_txn(3, org, org, "Quokka Renamed", 3));
  }
  catch_up(*sync);
  Query q;
  q.text = "quokka";
  const auto r = sync->index().search(q, {});
  std::set<SeqNo> hits;
  for (const auto& h : r.hits) hits.insert(h.seq_no);
  EXPECT_TRUE(hits.count(2));
  q.text = "before rename";
  for (const auto& h : sync->index().search(q, {}).hits) {
    for (const auto& m : h.matched_terms) {
      // Only seq 1's raw text still names the old alias.
      if (m.index_term == "before") {
        EXPECT_EQ(h.seq_no, 1u);
      }
    }
  }
}

}  // namespace
}  // namespace credsearch
