#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "credsearch/enrich.hpp"
#include "credsearch/index.hpp"
#include "credsearch/ledger_source.hpp"
#include "credsearch/ledger_store.hpp"
#include "credsearch/merkle.hpp"

namespace credsearch {

// Verified local ledger: the durable store, its Merkle tree and the documents
// in memory for lookups. Readers may run concurrently with one appender.
class LedgerCopy {
 public:
  // Replays the store and checks that it reproduces the checkpoint root and
  // that every line is already canonical. Throws kVerificationFailure.
  explicit LedgerCopy(const std::filesystem::path& data_dir);

  std::uint64_t size() const;
  Digest root() const;
  std::optional<std::string> document(SeqNo seq_no) const;
  // Throws kIndexOutOfRange.
  Inclusion inclusion(SeqNo seq_no) const;
  std::vector<std::string> documents() const;

  // Appends a contiguous run starting at size() + 1. Throws
  // kSequenceMismatch before touching anything, and kPersistenceFailure after
  // rolling the tree back when the store rejects the batch.
  void verify_and_append(std::span<const TxnEnvelope> envelopes);

  const LedgerStore& store() const { return store_; }

 private:
  LedgerStore store_;
  MerkleTree tree_;
  mutable std::shared_mutex mutex_;
  std::vector<std::string> docs_;
};

enum class SyncPhase { kCatchingUp, kSteady, kFatal };
std::string_view to_string(SyncPhase phase);

struct SyncConfig {
  std::filesystem::path data_dir = "data";
  std::chrono::milliseconds poll_interval{10000};
  std::uint64_t batch_size = 1000;
  MatchPolicy policy{};
};

struct SyncStats {
  std::uint64_t last_seq = 0;
  Digest root = empty_root();
  std::uint64_t doc_count = 0;
  std::uint64_t source_size = 0;
  SyncPhase phase = SyncPhase::kCatchingUp;
  std::string source_url;
  std::string fatal_reason;
  std::chrono::milliseconds poll_interval{0};
};

// Keeps a local ledger copy and the search index level with a source.
class SyncService {
 public:
  SyncService(SyncConfig config, std::unique_ptr<LedgerSource> source);
  ~SyncService();
  SyncService(const SyncService&) = delete;
  SyncService& operator=(const SyncService&) = delete;

  // Opens and verifies the local copy and rebuilds the index from it. A
  // verification failure leaves the service in kFatal rather than throwing.
  void open();

  // One poll: check the source head against the local root, then fetch,
  // verify, persist and index at most one batch. Returns true when the
  // source is known to be further ahead.
  bool run_cycle();

  // Background loop; start() calls open() first when needed.
  void start();
  void stop();
  // Wakes a sleeping loop for an immediate poll.
  void poke();

  // Blocks until last_seq >= seq, the service is fatal, or the timeout passes.
  bool wait_for_seq(std::uint64_t seq, std::chrono::milliseconds timeout) const;

  SyncStats stats() const;
  SyncPhase phase() const { return phase_.load(); }
  const ConcurrentIndex& index() const { return index_; }
  // Null until open() succeeded.
  const LedgerCopy* ledger() const { return copy_.get(); }
  const SyncConfig& config() const { return config_; }

 private:
  void ingest(std::span<const TxnEnvelope> envelopes);
  void fail(const std::string& reason);
  void loop(std::stop_token stop);

  SyncConfig config_;
  std::unique_ptr<LedgerSource> source_;
  std::unique_ptr<LedgerCopy> copy_;
  ConcurrentIndex index_;
  Enricher enricher_;

  std::atomic<SyncPhase> phase_{SyncPhase::kCatchingUp};
  std::atomic<std::uint64_t> source_size_{0};
  mutable std::mutex mutex_;
  mutable std::condition_variable_any progress_;
  std::string fatal_reason_;
  bool poked_ = false;
  std::jthread worker_;
};

}  // namespace credsearch
