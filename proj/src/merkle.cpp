#include "credsearch/merkle.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <bit>
#include <memory>
#include <mutex>

#include "credsearch/errors.hpp"

namespace credsearch {

namespace {

std::uint64_t largest_power_of_two_below(std::uint64_t n) {
  // n >= 2
  return std::bit_floor(n - 1);
}

bool is_lsb_set(std::uint64_t v) { return (v & 1U) != 0; }

}  // namespace

Digest sha256(std::span<const std::uint8_t> bytes) {
  Digest out{};
  SHA256(bytes.data(), bytes.size(), out.data());
  return out;
}

Digest hash_leaf(std::string_view leaf) {
  struct CtxDeleter {
    void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
  };
  thread_local std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx(EVP_MD_CTX_new());
  const std::uint8_t prefix = 0x00;
  Digest out{};
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx.get(), &prefix, 1);
  EVP_DigestUpdate(ctx.get(), leaf.data(), leaf.size());
  EVP_DigestFinal_ex(ctx.get(), out.data(), nullptr);
  return out;
}

Digest hash_children(const Digest& left, const Digest& right) {
  std::array<std::uint8_t, 65> buffer{};
  buffer[0] = 0x01;
  std::copy(left.begin(), left.end(), buffer.begin() + 1);
  std::copy(right.begin(), right.end(), buffer.begin() + 33);
  return sha256(buffer);
}

Digest empty_root() { return sha256({}); }

std::string to_hex(const Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (auto byte : digest) {
    out.push_back(kHex[byte >> 4]);
    out.push_back(kHex[byte & 0x0f]);
  }
  return out;
}

std::optional<Digest> digest_from_hex(std::string_view hex) {
  if (hex.size() != 64) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Digest out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

MerkleTree::MerkleTree(const MerkleTree& other) {
  std::shared_lock lock(other.mutex_);
  levels_ = other.levels_;
}

MerkleTree& MerkleTree::operator=(const MerkleTree& other) {
  if (this == &other) return *this;
  std::vector<std::vector<Digest>> copy;
  {
    std::shared_lock lock(other.mutex_);
    copy = other.levels_;
  }
  std::unique_lock lock(mutex_);
  levels_ = std::move(copy);
  return *this;
}

Digest MerkleTree::append(std::string_view leaf) {
  return append_hash(hash_leaf(leaf));
}

Digest MerkleTree::append_hash(const Digest& leaf_hash) {
  std::unique_lock lock(mutex_);
  return append_locked(leaf_hash);
}

Digest MerkleTree::append_locked(const Digest& leaf_hash) {
  if (levels_.empty()) levels_.emplace_back();
  levels_[0].push_back(leaf_hash);
  for (std::size_t h = 0; levels_[h].size() % 2 == 0; ++h) {
    const auto& level = levels_[h];
    Digest parent = hash_children(level[level.size() - 2], level.back());
    if (levels_.size() == h + 1) levels_.emplace_back();
    levels_[h + 1].push_back(parent);
  }
  return range_hash(0, levels_[0].size());
}

void MerkleTree::truncate(std::uint64_t new_size) {
  std::unique_lock lock(mutex_);
  if (levels_.empty() || new_size >= levels_[0].size()) return;
  for (std::size_t h = 0; h < levels_.size(); ++h) {
    levels_[h].resize(new_size >> h);
  }
  while (!levels_.empty() && levels_.back().empty()) levels_.pop_back();
}

std::uint64_t MerkleTree::size() const {
  std::shared_lock lock(mutex_);
  return levels_.empty() ? 0 : levels_[0].size();
}

Digest MerkleTree::root() const {
  std::shared_lock lock(mutex_);
  return range_hash(0, levels_.empty() ? 0 : levels_[0].size());
}

Digest MerkleTree::root_at(std::uint64_t tree_size) const {
  std::shared_lock lock(mutex_);
  std::uint64_t n = levels_.empty() ? 0 : levels_[0].size();
  if (tree_size > n) {
    throw Error(Errc::kIndexOutOfRange,
                "tree size " + std::to_string(tree_size) + " > " +
                    std::to_string(n));
  }
  return range_hash(0, tree_size);
}

Digest MerkleTree::leaf_hash(std::uint64_t index) const {
  std::shared_lock lock(mutex_);
  if (levels_.empty() || index >= levels_[0].size()) {
    throw Error(Errc::kIndexOutOfRange, "leaf " + std::to_string(index));
  }
  return levels_[0][index];
}

Digest MerkleTree::range_hash(std::uint64_t begin, std::uint64_t end) const {
  const std::uint64_t n = end - begin;
  if (n == 0) return empty_root();
  if (std::has_single_bit(n) && begin % n == 0) {
    auto h = static_cast<std::size_t>(std::countr_zero(n));
    return levels_[h][begin >> h];
  }
  const std::uint64_t k = largest_power_of_two_below(n);
  return hash_children(range_hash(begin, begin + k), range_hash(begin + k, end));
}

AuditPath MerkleTree::audit_path(std::uint64_t index) const {
  return inclusion(index).path;
}

AuditPath MerkleTree::audit_path(std::uint64_t index,
                                 std::uint64_t tree_size) const {
  std::shared_lock lock(mutex_);
  std::uint64_t n = levels_.empty() ? 0 : levels_[0].size();
  if (tree_size > n || index >= tree_size) {
    throw Error(Errc::kIndexOutOfRange,
                "leaf " + std::to_string(index) + " in tree of " +
                    std::to_string(tree_size));
  }
  AuditPath path{index, {}};
  path_into(index, 0, tree_size, path.sibling_hashes);
  return path;
}

Inclusion MerkleTree::inclusion(std::uint64_t index) const {
  std::shared_lock lock(mutex_);
  std::uint64_t n = levels_.empty() ? 0 : levels_[0].size();
  if (index >= n) {
    throw Error(Errc::kIndexOutOfRange,
                "leaf " + std::to_string(index) + " in tree of " +
                    std::to_string(n));
  }
  Inclusion result;
  result.path.leaf_index = index;
  path_into(index, 0, n, result.path.sibling_hashes);
  result.tree_size = n;
  result.root = range_hash(0, n);
  return result;
}

void MerkleTree::path_into(std::uint64_t index, std::uint64_t begin,
                           std::uint64_t end, std::vector<Digest>& out) const {
  const std::uint64_t n = end - begin;
  if (n <= 1) return;
  const std::uint64_t k = largest_power_of_two_below(n);
  if (index < k) {
    path_into(index, begin, begin + k, out);
    out.push_back(range_hash(begin + k, end));
  } else {
    path_into(index - k, begin + k, end, out);
    out.push_back(range_hash(begin, begin + k));
  }
}

ConsistencyProof MerkleTree::consistency_proof(std::uint64_t old_size,
                                               std::uint64_t new_size) const {
  std::shared_lock lock(mutex_);
  std::uint64_t n = levels_.empty() ? 0 : levels_[0].size();
  if (old_size == 0 || old_size > new_size || new_size > n) {
    throw Error(Errc::kIndexOutOfRange,
                "consistency " + std::to_string(old_size) + " -> " +
                    std::to_string(new_size) + " in tree of " +
                    std::to_string(n));
  }
  ConsistencyProof proof{old_size, new_size, {}};
  subproof_into(old_size, 0, new_size, true, proof.hashes);
  return proof;
}

void MerkleTree::subproof_into(std::uint64_t old_size, std::uint64_t begin,
                               std::uint64_t end, bool whole_old_tree,
                               std::vector<Digest>& out) const {
  const std::uint64_t n = end - begin;
  if (old_size == n) {
    if (!whole_old_tree) out.push_back(range_hash(begin, end));
    return;
  }
  const std::uint64_t k = largest_power_of_two_below(n);
  if (old_size <= k) {
    subproof_into(old_size, begin, begin + k, whole_old_tree, out);
    out.push_back(range_hash(begin + k, end));
  } else {
    subproof_into(old_size - k, begin + k, end, false, out);
    out.push_back(range_hash(begin, begin + k));
  }
}

bool verify_audit(std::string_view leaf, std::uint64_t index,
                  std::uint64_t tree_size, const AuditPath& path,
                  const Digest& root) {
  if (index >= tree_size) return false;
  std::uint64_t fn = index;
  std::uint64_t sn = tree_size - 1;
  Digest r = hash_leaf(leaf);
  for (const auto& sibling : path.sibling_hashes) {
    if (sn == 0) return false;
    if (is_lsb_set(fn) || fn == sn) {
      r = hash_children(sibling, r);
      if (!is_lsb_set(fn)) {
        while (!is_lsb_set(fn) && fn != 0) {
          fn >>= 1;
          sn >>= 1;
        }
      }
    } else {
      r = hash_children(r, sibling);
    }
    fn >>= 1;
    sn >>= 1;
  }
  return sn == 0 && r == root;
}

bool verify_consistency(const Digest& old_root, const Digest& new_root,
                        const ConsistencyProof& proof) {
  const auto first = proof.old_size;
  const auto second = proof.new_size;
  if (first == 0 || first > second) return false;
  if (first == second) return proof.hashes.empty() && old_root == new_root;
  if (proof.hashes.empty()) return false;

  std::vector<Digest> path;
  path.reserve(proof.hashes.size() + 1);
  if (std::has_single_bit(first)) path.push_back(old_root);
  path.insert(path.end(), proof.hashes.begin(), proof.hashes.end());

  std::uint64_t fn = first - 1;
  std::uint64_t sn = second - 1;
  while (is_lsb_set(fn)) {
    fn >>= 1;
    sn >>= 1;
  }
  Digest fr = path[0];
  Digest sr = path[0];
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto& c = path[i];
    if (sn == 0) return false;
    if (is_lsb_set(fn) || fn == sn) {
      fr = hash_children(c, fr);
      sr = hash_children(c, sr);
      if (!is_lsb_set(fn)) {
        while (!is_lsb_set(fn) && fn != 0) {
          fn >>= 1;
          sn >>= 1;
        }
      }
    } else {
      sr = hash_children(sr, c);
    }
    fn >>= 1;
    sn >>= 1;
  }
  return sn == 0 && fr == old_root && sr == new_root;
}

Digest merkle_root(std::span<const std::string> leaves) {
  if (leaves.empty()) return empty_root();
  std::vector<Digest> level;
  level.reserve(leaves.size());
  for (const auto& leaf : leaves) level.push_back(hash_leaf(leaf));
  // Pairwise reduction with promotion of the odd tail reproduces the
  // largest-power-of-two split.
  while (level.size() > 1) {
    std::vector<Digest> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      next.push_back(hash_children(level[i], level[i + 1]));
    }
    if (level.size() % 2 == 1) next.push_back(level.back());
    level = std::move(next);
  }
  return level[0];
}

}  // namespace credsearch
