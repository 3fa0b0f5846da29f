#pragma once

// Append-only Merkle tree with RFC 6962 domain separation:
//
//   leaf hash     = SHA-256(0x00 || leaf)
//   interior hash = SHA-256(0x01 || left || right)
//   empty tree    = SHA-256("")
//
// A tree of n leaves splits at the largest power of two k < n; the left
// subtree is always perfect, so unpaired nodes are promoted rather than
// duplicated.

#include <array>
#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace credsearch {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> bytes);
Digest hash_leaf(std::string_view leaf);
Digest hash_children(const Digest& left, const Digest& right);
Digest empty_root();

std::string to_hex(const Digest& digest);
std::optional<Digest> digest_from_hex(std::string_view hex);

struct AuditPath {
  std::uint64_t leaf_index = 0;
  // Ordered from the leaf level upwards.
  std::vector<Digest> sibling_hashes;
};

struct ConsistencyProof {
  std::uint64_t old_size = 0;
  std::uint64_t new_size = 0;
  std::vector<Digest> hashes;
};

// An audit path together with the tree size and root it was cut from.
struct Inclusion {
  AuditPath path;
  std::uint64_t tree_size = 0;
  Digest root{};
};

// Readers may call the const members concurrently with each other and with
// a single writer; each call observes the tree between two appends.
class MerkleTree {
 public:
  MerkleTree() = default;
  MerkleTree(const MerkleTree& other);
  MerkleTree& operator=(const MerkleTree& other);

  Digest append(std::string_view leaf);
  Digest append_hash(const Digest& leaf_hash);
  // Drops leaves beyond new_size. Used to roll back a failed batch.
  void truncate(std::uint64_t new_size);

  std::uint64_t size() const;
  Digest root() const;
  // Root of the first tree_size leaves. Throws kIndexOutOfRange.
  Digest root_at(std::uint64_t tree_size) const;
  Digest leaf_hash(std::uint64_t index) const;

  // Throws kIndexOutOfRange unless index < size().
  AuditPath audit_path(std::uint64_t index) const;
  AuditPath audit_path(std::uint64_t index, std::uint64_t tree_size) const;
  Inclusion inclusion(std::uint64_t index) const;

  // Throws kIndexOutOfRange unless 0 < old_size <= new_size <= size().
  ConsistencyProof consistency_proof(std::uint64_t old_size,
                                     std::uint64_t new_size) const;

 private:
  Digest append_locked(const Digest& leaf_hash);
  Digest range_hash(std::uint64_t begin, std::uint64_t end) const;
  void path_into(std::uint64_t index, std::uint64_t begin, std::uint64_t end,
                 std::vector<Digest>& out) const;
  void subproof_into(std::uint64_t old_size, std::uint64_t begin,
                     std::uint64_t end, bool whole_old_tree,
                     std::vector<Digest>& out) const;

  mutable std::shared_mutex mutex_;
  // levels_[h][i] is the root of the perfect subtree covering leaves
  // [i * 2^h, (i + 1) * 2^h). Only complete subtrees are stored.
  std::vector<std::vector<Digest>> levels_;
};

bool verify_audit(std::string_view leaf, std::uint64_t index,
                  std::uint64_t tree_size, const AuditPath& path,
                  const Digest& root);

bool verify_consistency(const Digest& old_root, const Digest& new_root,
                        const ConsistencyProof& proof);

// Batch construction straight from the leaf sequence.
Digest merkle_root(std::span<const std::string> leaves);

}  // namespace credsearch
