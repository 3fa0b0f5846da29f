#pragma once

// Closed-loop HTTP load generator for the query API. Each query class is run
// for a fixed duration over a pool of keep-alive connections driven by one
// epoll loop per thread; a sample of responses is checked against the
// brute-force scorer.

#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "credsearch/brute_force.hpp"
#include "credsearch/enriched_doc.hpp"
#include "credsearch/scoring.hpp"

namespace credsearch {

struct QueryClass {
  std::string name;
  std::vector<Query> queries;
};

// Request path for a query, e.g. "/search?q=proof%20of%20employment&type=schema&limit=10".
std::string search_target(const Query& query);

// The five standard classes, with representatives drawn from the corpus.
std::vector<QueryClass> default_query_classes(std::span<const EnrichedDoc> corpus,
                                              std::uint64_t seed = 7,
                                              std::size_t per_class = 16);

// Swaps two adjacent, distinct bytes in the longest word. Returns the text
// unchanged when no word has two distinct adjacent bytes.
std::string adjacent_swap_typo(std::string_view text, std::uint64_t seed);

struct BenchConfig {
  std::string target_url = "http://127.0.0.1:8080";
  std::size_t connections = 400;
  std::size_t threads = 1;
  // Per class; at least one second.
  std::chrono::milliseconds duration{30000};
  // Fraction of responses compared against the reference scorer.
  double validation_rate = 0.01;
  std::chrono::milliseconds request_timeout{10000};
  std::uint64_t seed = 1;

  // Throws Error(kInvalidConfig).
  void validate() const;
};

struct ClassReport {
  std::string name;
  std::uint64_t requests = 0;
  std::uint64_t errors = 0;
  std::uint64_t validated = 0;
  std::uint64_t mismatches = 0;
  double req_per_sec = 0.0;
  double p50_ms = 0.0;
  double p99_ms = 0.0;
  std::string first_problem;
};

struct BenchReport {
  std::vector<ClassReport> classes;
  std::size_t connections = 0;
  std::chrono::milliseconds duration{0};
  std::string environment;

  // False when any request failed or any sampled response disagreed with the
  // reference scorer.
  bool ok() const;
  std::string table() const;
  // Header: class,req_per_sec,p50_ms,p99_ms
  std::string csv() const;
};

// Returns an empty string when the body is a correct answer to the query,
// otherwise a description of the difference.
using ResponseCheck = std::function<std::string(const Query& query, std::string_view body)>;

// Compares /search responses against BruteForceCorpus. Expected results are
// computed once per distinct query and cached.
class OracleCheck {
 public:
  OracleCheck(std::vector<EnrichedDoc> corpus, FieldWeights weights = {},
              MatchPolicy policy = {});
  std::string operator()(const Query& query, std::string_view body);

 private:
  BruteForceCorpus oracle_;
  FieldWeights weights_;
  std::mutex mutex_;
  std::unordered_map<std::string, SearchResult> cache_;
};

// The canonical documents a running query API serves, read back through
// /stats and /txn/{seq} for seq 1..last_seq. Lets the driver build its
// classes and reference scorer from exactly the corpus under test. Throws
// Error(kTargetUnreachable) on connection failure and Error(kInvalidConfig)
// when the target answers with an error (for example 503 after a halt).
std::vector<std::string> fetch_served_ledger(const std::string& target_url);

// Throws Error(kTargetUnreachable) when /health cannot be reached at start
// or the target stops answering during a class. A non-ok() report is returned, not thrown;
// callers map it to kNonZeroErrorRate.
BenchReport run_bench(const BenchConfig& config, const std::vector<QueryClass>& classes,
                      const ResponseCheck& check);

}  // namespace credsearch
