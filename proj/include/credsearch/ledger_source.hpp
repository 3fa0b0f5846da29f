#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "credsearch/ledger_model.hpp"
#include "credsearch/merkle.hpp"

namespace credsearch {

struct SourceHead {
  std::uint64_t size = 0;
  // Absent when the source does not advertise a Merkle root.
  std::optional<Digest> root;
};

struct RangeReply {
  std::vector<std::string> documents;
  std::uint64_t head = 0;
};

// Where transactions come from. Implementations throw
// Error(kSourceUnavailable) on transport failure.
class LedgerSource {
 public:
  virtual ~LedgerSource() = default;

  virtual SourceHead head() = 0;
  // Inclusive range; may return fewer documents than asked for (server cap or
  // end of ledger) and none when `from` is beyond the head.
  virtual RangeReply fetch(SeqNo from, SeqNo to) = 0;
  // nullopt when the source cannot produce consistency proofs.
  virtual std::optional<ConsistencyProof> consistency(std::uint64_t old_size,
                                                      std::uint64_t new_size) = 0;
  virtual std::string url() const = 0;
};

struct RetryPolicy {
  std::chrono::milliseconds base_delay{250};
  double factor = 2.0;
  int max_attempts = 5;
};

// HTTP client for the simulator's endpoint set (/size, /txns, /consistency).
class HttpLedgerSource : public LedgerSource {
 public:
  explicit HttpLedgerSource(std::string base_url, RetryPolicy retry = {});
  ~HttpLedgerSource() override;

  SourceHead head() override;
  RangeReply fetch(SeqNo from, SeqNo to) override;
  std::optional<ConsistencyProof> consistency(std::uint64_t old_size,
                                              std::uint64_t new_size) override;
  std::string url() const override { return base_url_; }

 private:
  struct Reply {
    int status = 0;
    std::string body;
    std::optional<std::uint64_t> ledger_size;
  };
  Reply get(const std::string& path);

  std::string base_url_;
  RetryPolicy retry_;
};

struct FetchResult {
  std::vector<TxnEnvelope> envelopes;
  std::uint64_t head = 0;
};

// Fetches [from, to] in as many round trips as the source's batch cap needs,
// stopping early at the source head. Throws kGapDetected when the returned
// sequence numbers are not exactly from, from + 1, ...; parse errors
// propagate from parse_txn.
FetchResult fetch_range(LedgerSource& source, SeqNo from, SeqNo to);

}  // namespace credsearch
