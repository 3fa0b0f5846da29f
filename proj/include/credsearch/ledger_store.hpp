#pragma once

// Durable ledger copy: ledger.ndjson holds one canonical document per line in
// seqNo order; checkpoint.json records {last_seq, root_hash, byte_length} and
// is replaced atomically (write + rename) after every appended batch. Bytes
// past the checkpointed length are an interrupted batch and are discarded on
// open.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "credsearch/merkle.hpp"

namespace credsearch {

struct Checkpoint {
  std::uint64_t last_seq = 0;
  Digest root = empty_root();
  std::uint64_t byte_length = 0;
};

class LedgerStore {
 public:
  static constexpr std::string_view kLedgerFile = "ledger.ndjson";
  static constexpr std::string_view kCheckpointFile = "checkpoint.json";

  // Creates the directory when missing. Throws kPersistenceFailure on I/O
  // errors and kVerificationFailure when the files contradict each other.
  explicit LedgerStore(std::filesystem::path dir);

  // Lines of the checkpointed prefix, read at open.
  std::vector<std::string> load() const;
  const Checkpoint& checkpoint() const { return checkpoint_; }
  const std::filesystem::path& directory() const { return dir_; }
  std::filesystem::path ledger_path() const { return dir_ / kLedgerFile; }
  std::filesystem::path checkpoint_path() const { return dir_ / kCheckpointFile; }

  // Appends lines and then publishes a checkpoint naming new_root. On failure
  // the file is cut back to the previous checkpoint and kPersistenceFailure
  // is thrown.
  void append(std::span<const std::string> canonical_docs, const Digest& new_root);

 private:
  void write_checkpoint(const Checkpoint& next);

  std::filesystem::path dir_;
  Checkpoint checkpoint_;
};

}  // namespace credsearch
