#include "credsearch/sync.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

#include "credsearch/errors.hpp"

namespace credsearch {

LedgerCopy::LedgerCopy(const std::filesystem::path& data_dir) : store_(data_dir) {
  std::vector<std::string> lines = store_.load();
  const Checkpoint& cp = store_.checkpoint();
  if (lines.size() != cp.last_seq) {
    throw Error(Errc::kVerificationFailure,
                "ledger copy holds " + std::to_string(lines.size()) +
                    " documents, checkpoint says " + std::to_string(cp.last_seq));
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string canonical;
    try {
      canonical = canonicalize(lines[i]);
    } catch (const Error& e) {
      throw Error(Errc::kVerificationFailure,
                  "document " + std::to_string(i + 1) + " is not JSON: " + e.what());
    }
    if (canonical != lines[i]) {
      throw Error(Errc::kVerificationFailure,
                  "document " + std::to_string(i + 1) + " is not in canonical form");
    }
    tree_.append(lines[i]);
  }
  if (tree_.root() != cp.root) {
    throw Error(Errc::kVerificationFailure,
                "ledger copy root " + to_hex(tree_.root()) + " does not match checkpoint " +
                    to_hex(cp.root));
  }
  docs_ = std::move(lines);
}

std::uint64_t LedgerCopy::size() const {
  std::shared_lock lock(mutex_);
  return docs_.size();
}

Digest LedgerCopy::root() const {
  std::shared_lock lock(mutex_);
  return tree_.root();
}

std::optional<std::string> LedgerCopy::document(SeqNo seq_no) const {
  std::shared_lock lock(mutex_);
  if (seq_no == 0 || seq_no > docs_.size()) return std::nullopt;
  return docs_[seq_no - 1];
}

Inclusion LedgerCopy::inclusion(SeqNo seq_no) const {
  std::shared_lock lock(mutex_);
  if (seq_no == 0 || seq_no > docs_.size()) {
    throw Error(Errc::kIndexOutOfRange, "no transaction " + std::to_string(seq_no));
  }
  return tree_.inclusion(seq_no - 1);
}

std::vector<std::string> LedgerCopy::documents() const {
  std::shared_lock lock(mutex_);
  return docs_;
}

void LedgerCopy::verify_and_append(std::span<const TxnEnvelope> envelopes) {
  std::unique_lock lock(mutex_);
  const std::uint64_t base = docs_.size();
  for (std::size_t i = 0; i < envelopes.size(); ++i) {
    if (envelopes[i].seq_no != base + 1 + i) {
      throw Error(Errc::kSequenceMismatch,
                  "expected seqNo " + std::to_string(base + 1 + i) + ", got " +
                      std::to_string(envelopes[i].seq_no));
    }
  }
  std::vector<std::string> lines;
  lines.reserve(envelopes.size());
  for (const auto& env : envelopes) lines.push_back(canonical_leaf_bytes(env));

  for (const auto& line : lines) tree_.append(line);
  try {
    store_.append(lines, tree_.root());
  } catch (...) {
    tree_.truncate(base);
    throw;
  }
  docs_.insert(docs_.end(), std::make_move_iterator(lines.begin()),
               std::make_move_iterator(lines.end()));
}

std::string_view to_string(SyncPhase phase) {
  switch (phase) {
    case SyncPhase::kCatchingUp: return "catching_up";
    case SyncPhase::kSteady: return "steady";
    case SyncPhase::kFatal: return "fatal";
  }
  return "unknown";
}

SyncService::SyncService(SyncConfig config, std::unique_ptr<LedgerSource> source)
    : config_(std::move(config)), source_(std::move(source)), index_(config_.policy) {
  if (config_.batch_size == 0) throw Error(Errc::kInvalidConfig, "batch_size must be positive");
  if (config_.poll_interval.count() < 0) {
    throw Error(Errc::kInvalidConfig, "poll_interval must not be negative");
  }
}

SyncService::~SyncService() { stop(); }

void SyncService::fail(const std::string& reason) {
  spdlog::critical("sync halted: {}", reason);
  {
    std::lock_guard lock(mutex_);
    fatal_reason_ = reason;
    phase_ = SyncPhase::kFatal;
  }
  progress_.notify_all();
}

void SyncService::open() {
  if (copy_ || phase_ == SyncPhase::kFatal) return;
  try {
    auto copy = std::make_unique<LedgerCopy>(config_.data_dir);
    std::vector<std::string> lines = copy->documents();
    std::vector<LedgerEntry> entries;
    entries.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
      TxnEnvelope env = parse_txn(lines[i]);
      if (env.seq_no != i + 1) {
        throw Error(Errc::kVerificationFailure, "document " + std::to_string(i + 1) +
                                                    " carries seqNo " +
                                                    std::to_string(env.seq_no));
      }
      try {
        entries.push_back(classify(env));
      } catch (const Error& e) {
        if (e.code() != Errc::kPayloadSchemaViolation) throw;
      }
    }
    index_.apply(enricher_.ingest(entries, nullptr));
    spdlog::info("opened ledger copy at {}: {} transactions, {} indexed", config_.data_dir.string(),
                 lines.size(), index_.doc_count());
    std::lock_guard lock(mutex_);
    copy_ = std::move(copy);
  } catch (const Error& e) {
    fail(std::string("local ledger copy rejected: ") + e.what());
  }
}

void SyncService::ingest(std::span<const TxnEnvelope> envelopes) {
  std::vector<LedgerEntry> entries;
  entries.reserve(envelopes.size());
  for (const auto& env : envelopes) {
    try {
      entries.push_back(classify(env));
    } catch (const Error& e) {
      if (e.code() != Errc::kPayloadSchemaViolation) throw;
      spdlog::warn("transaction {} stored but not indexed: {}", env.seq_no, e.what());
    }
  }
  copy_->verify_and_append(envelopes);

  DocLookup existing = [this](SeqNo seq) {
    return index_.read([seq](const InvertedIndex& idx) -> std::optional<EnrichedDoc> {
      const EnrichedDoc* doc = idx.find(seq);
      return doc ? std::optional<EnrichedDoc>(*doc) : std::nullopt;
    });
  };
  index_.apply(enricher_.ingest(entries, existing));
  { std::lock_guard lock(mutex_); }
  progress_.notify_all();
}

bool SyncService::run_cycle() {
  if (!copy_) open();
  if (phase_ == SyncPhase::kFatal) return false;
  try {
    const SourceHead head = source_->head();
    source_size_ = head.size;
    const std::uint64_t last = copy_->size();
    if (head.size < last) {
      fail("source shrank from " + std::to_string(last) + " to " + std::to_string(head.size));
      return false;
    }
    if (head.root) {
      if (head.size == last) {
        if (*head.root != copy_->root()) {
          fail("source root " + to_hex(*head.root) + " differs from local root " +
               to_hex(copy_->root()) + " at size " + std::to_string(last));
          return false;
        }
      } else if (last > 0) {
        if (auto proof = source_->consistency(last, head.size)) {
          if (proof->old_size != last || proof->new_size != head.size ||
              !verify_consistency(copy_->root(), *head.root, *proof)) {
            fail("source at size " + std::to_string(head.size) +
                 " is not an extension of the local copy at size " + std::to_string(last));
            return false;
          }
        }
      }
    }
    if (head.size == last) {
      phase_ = SyncPhase::kSteady;
      return false;
    }
    phase_ = SyncPhase::kCatchingUp;
    const SeqNo to = std::min<std::uint64_t>(head.size, last + config_.batch_size);
    FetchResult fetched = fetch_range(*source_, last + 1, to);
    if (fetched.envelopes.empty()) return false;
    ingest(fetched.envelopes);
    const std::uint64_t now = copy_->size();
    if (head.root && now == head.size && copy_->root() != *head.root) {
      fail("fetched transactions do not reproduce the source root at size " +
           std::to_string(now));
      return false;
    }
    spdlog::info("synced to seqNo {} of {}", now, head.size);
    return now < head.size;
  } catch (const Error& e) {
    switch (e.code()) {
      case Errc::kSourceUnavailable:
      case Errc::kGapDetected:
        spdlog::warn("poll failed, retrying next cycle: {}", e.what());
        return false;
      default:
        fail(e.what());
        return false;
    }
  }
}

void SyncService::loop(std::stop_token stop) {
  while (!stop.stop_requested()) {
    const bool more = run_cycle();
    std::unique_lock lock(mutex_);
    if (phase_ == SyncPhase::kFatal) {
      progress_.wait(lock, stop, [] { return false; });
      return;
    }
    if (more) continue;
    progress_.wait_for(lock, stop, config_.poll_interval, [this] { return poked_; });
    poked_ = false;
  }
}

void SyncService::start() {
  if (worker_.joinable()) return;
  open();
  worker_ = std::jthread([this](std::stop_token stop) { loop(stop); });
}

void SyncService::stop() {
  if (!worker_.joinable()) return;
  worker_.request_stop();
  worker_.join();
}

void SyncService::poke() {
  {
    std::lock_guard lock(mutex_);
    poked_ = true;
  }
  progress_.notify_all();
}

bool SyncService::wait_for_seq(std::uint64_t seq, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return progress_.wait_for(lock, timeout, [&] {
    return phase_ == SyncPhase::kFatal || (copy_ && copy_->size() >= seq);
  }) && phase_ != SyncPhase::kFatal;
}

SyncStats SyncService::stats() const {
  SyncStats out;
  std::lock_guard lock(mutex_);
  if (copy_) {
    out.last_seq = copy_->size();
    out.root = copy_->root();
  }
  out.doc_count = index_.doc_count();
  out.source_size = source_size_;
  out.phase = phase_;
  out.source_url = source_ ? source_->url() : "";
  out.fatal_reason = fatal_reason_;
  out.poll_interval = config_.poll_interval;
  return out;
}

}  // namespace credsearch
