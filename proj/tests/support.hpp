#pragma once

// Shared helpers for the test suites: scratch directories, small fixture
// ledgers and an in-memory LedgerSource whose contents a test can rewrite.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "credsearch/errors.hpp"
#include "credsearch/ledger_model.hpp"
#include "credsearch/ledger_sim.hpp"
#include "credsearch/ledger_source.hpp"
#include "credsearch/merkle.hpp"

namespace credsearch::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("credsearch-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline SimLedger small_ledger(std::uint64_t seed = 42) {
  GeneratorConfig config;
  config.seed = seed;
  config.n_orgs = 6;
  config.n_schemas = 8;
  config.claim_defs_per_schema = 2;
  config.n_plain_nyms = 5;
  config.n_alias_updates = 3;
  config.n_attribs = 2;
  return generate(config);
}

// In-memory source. Tests hold the shared state to append, rewrite or cut
// documents and to make the next requests fail.
class FakeSource : public LedgerSource {
 public:
  struct State {
    std::mutex mutex;
    std::vector<std::string> docs;
    std::uint64_t max_batch = 1000;
    int fail_next = 0;
    bool advertise_root = true;
    bool serve_proofs = true;
    // Returned by fetch in place of the real documents when set.
    std::vector<std::string> fetch_override;
    int head_calls = 0;
  };

  explicit FakeSource(std::shared_ptr<State> state) : state_(std::move(state)) {}

  SourceHead head() override {
    std::lock_guard lock(state_->mutex);
    ++state_->head_calls;
    maybe_fail();
    SourceHead h;
    h.size = state_->docs.size();
    if (state_->advertise_root) h.root = merkle_root(state_->docs);
    return h;
  }

  RangeReply fetch(SeqNo from, SeqNo to) override {
    std::lock_guard lock(state_->mutex);
    maybe_fail();
    RangeReply reply;
    reply.head = state_->docs.size();
    if (!state_->fetch_override.empty()) {
      reply.documents = state_->fetch_override;
      return reply;
    }
    for (SeqNo s = from; s <= to && s <= state_->docs.size() &&
                         s < from + state_->max_batch;
         ++s) {
      reply.documents.push_back(state_->docs[s - 1]);
    }
    return reply;
  }

  std::optional<ConsistencyProof> consistency(std::uint64_t old_size,
                                              std::uint64_t new_size) override {
    std::lock_guard lock(state_->mutex);
    maybe_fail();
    if (!state_->serve_proofs) return std::nullopt;
    MerkleTree tree;
    for (const auto& d : state_->docs) tree.append(d);
    return tree.consistency_proof(old_size, new_size);
  }

  std::string url() const override { return "fake://ledger"; }

 private:
  void maybe_fail() {
    if (state_->fail_next > 0) {
      --state_->fail_next;
      throw Error(Errc::kSourceUnavailable, "injected failure");
    }
  }

  std::shared_ptr<State> state_;
};

inline std::string random_bytes(std::mt19937_64& rng, std::size_t n) {
  std::string out(n, '\0');
  for (auto& c : out) c = static_cast<char>(rng() & 0xff);
  return out;
}

}  // namespace credsearch::testing
