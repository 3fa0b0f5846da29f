#pragma once

// Deterministic synthetic domain ledger and an HTTP server that stands in for
// the verifiable data registry.

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "credsearch/ledger_model.hpp"
#include "credsearch/merkle.hpp"

namespace httplib {
class Server;
}

namespace credsearch {

inline constexpr std::string_view kFixtureAlias = "Phil Windley";

std::vector<std::string> default_alias_vocab();
std::vector<std::string> default_schema_name_vocab();
std::vector<std::string> default_attr_vocab();

struct GeneratorConfig {
  std::uint64_t seed = 42;
  // Issuer NYMs carrying an alias.
  std::uint64_t n_orgs = 10;
  std::uint64_t n_schemas = 10;
  std::uint64_t claim_defs_per_schema = 1;
  // NYMs without alias (holders, agents).
  std::uint64_t n_plain_nyms = 0;
  // NYMs re-registering an existing org under a new alias.
  std::uint64_t n_alias_updates = 0;
  std::uint64_t n_attribs = 0;
  // When set, CLAIM_DEFs reference uniformly drawn earlier schemas and this
  // count replaces n_schemas * claim_defs_per_schema.
  std::optional<std::uint64_t> n_claim_defs;
  std::vector<std::string> alias_vocab = default_alias_vocab();
  std::vector<std::string> schema_name_vocab = default_schema_name_vocab();
  std::vector<std::string> attr_vocab = default_attr_vocab();

  // Config emitting exactly `count` transactions with the default mix of
  // 60% NYM, 15% SCHEMA, 20% CLAIM_DEF, 5% ATTRIB.
  static GeneratorConfig sized(std::uint64_t count, std::uint64_t seed = 42);

  std::uint64_t claim_def_count() const;
  std::uint64_t total_count() const;
};

class SimLedger {
 public:
  SimLedger() = default;
  explicit SimLedger(std::vector<std::string> documents);

  std::uint64_t size() const { return documents_.size(); }
  // Canonical documents; index 0 holds seqNo 1.
  const std::vector<std::string>& documents() const { return documents_; }
  TxnEnvelope envelope(SeqNo seq) const;
  Digest root() const { return tree_.root(); }
  const MerkleTree& tree() const { return tree_; }

  // Throws Error(kInvalidConfig) naming the first broken ledger invariant.
  void validate() const;

 private:
  std::vector<std::string> documents_;
  MerkleTree tree_;
};

// Throws Error(kInvalidConfig).
SimLedger generate(const GeneratorConfig& config);

// Builds one canonical transaction document. Exposed for tests and tools
// that append to a running simulator.
std::string make_schema_txn(SeqNo seq, const Did& author,
                            const std::string& name, const std::string& version,
                            const std::vector<std::string>& attrs,
                            std::int64_t txn_time);
std::string make_nym_txn(SeqNo seq, const Did& author, const Did& dest,
                         const std::optional<std::string>& alias,
                         std::int64_t txn_time);

struct SimServerOptions {
  std::uint64_t max_batch = 1000;
  std::uint64_t genesis_count = 1;
  bool mutable_ledger = false;
};

// Endpoints:
//   GET  /genesis                   first genesis_count NYMs, NDJSON
//   GET  /txns?from=&to=            inclusive range, NDJSON, capped at max_batch
//   GET  /size                      {"size": n, "root_hash": hex}
//   GET  /consistency?old=&new=     {"old_size", "new_size", "hashes": [hex]}
//   POST /txns                      append one document (mutable mode only)
class SimServer {
 public:
  SimServer(SimLedger ledger, SimServerOptions options);
  ~SimServer();
  SimServer(const SimServer&) = delete;
  SimServer& operator=(const SimServer&) = delete;

  // Binds and serves on a background thread. Port 0 picks a free port.
  // Returns the bound port.
  int start(const std::string& host, int port);
  // Blocks the calling thread serving requests.
  bool listen(const std::string& host, int port);
  void stop();

  std::uint64_t size() const;
  Digest root() const;
  std::string base_url() const;

 private:
  void install_routes();

  struct Validation {
    bool ok;
    std::string message;
  };
  Validation validate_append(const TxnEnvelope& env) const;

  SimServerOptions options_;
  mutable std::shared_mutex mutex_;
  std::vector<std::string> documents_;
  MerkleTree tree_;
  // Ledger facts needed to validate appends.
  std::vector<TxnType> types_;
  std::unordered_set<std::string> introduced_dids_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  std::atomic<int> port_{0};
};

}  // namespace credsearch
