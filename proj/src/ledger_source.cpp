#include "credsearch/ledger_source.hpp"

#include <spdlog/spdlog.h>

#include <thread>

#include "credsearch/errors.hpp"
#include "httplib.h"

namespace credsearch {

using nlohmann::json;

HttpLedgerSource::HttpLedgerSource(std::string base_url, RetryPolicy retry)
    : base_url_(std::move(base_url)), retry_(retry) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

HttpLedgerSource::~HttpLedgerSource() = default;

HttpLedgerSource::Reply HttpLedgerSource::get(const std::string& path) {
  auto delay = retry_.base_delay;
  std::string last_error;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(std::chrono::seconds(5));
    client.set_read_timeout(std::chrono::seconds(30));
    auto res = client.Get(path);
    if (res && res->status < 500) {
      Reply reply{res->status, std::move(res->body), std::nullopt};
      if (res->has_header("X-Ledger-Size")) {
        try {
          reply.ledger_size = std::stoull(res->get_header_value("X-Ledger-Size"));
        } catch (const std::exception&) {
          spdlog::warn("ignoring unparseable X-Ledger-Size header");
        }
      }
      return reply;
    }
    last_error = res ? "HTTP " + std::to_string(res->status)
                     : httplib::to_string(res.error());
    if (attempt < retry_.max_attempts) {
      spdlog::warn("GET {}{} failed ({}), retry {} in {} ms", base_url_, path,
                   last_error, attempt, delay.count());
      std::this_thread::sleep_for(delay);
      delay = std::chrono::milliseconds(
          static_cast<long>(static_cast<double>(delay.count()) * retry_.factor));
    }
  }
  throw Error(Errc::kSourceUnavailable, base_url_ + path + ": " + last_error);
}

SourceHead HttpLedgerSource::head() {
  auto reply = get("/size");
  if (reply.status != 200) {
    throw Error(Errc::kSourceUnavailable, "/size returned " + std::to_string(reply.status));
  }
  SourceHead head;
  try {
    auto body = json::parse(reply.body);
    head.size = body.at("size").get<std::uint64_t>();
    if (body.contains("root_hash") && body["root_hash"].is_string()) {
      head.root = digest_from_hex(body["root_hash"].get<std::string>());
    }
  } catch (const json::exception& e) {
    throw Error(Errc::kSourceUnavailable, std::string("/size body: ") + e.what());
  }
  return head;
}

RangeReply HttpLedgerSource::fetch(SeqNo from, SeqNo to) {
  auto reply = get("/txns?from=" + std::to_string(from) + "&to=" + std::to_string(to));
  RangeReply out;
  if (reply.status == 416) {
    out.head = reply.ledger_size.value_or(0);
    if (!reply.ledger_size) out.head = head().size;
    return out;
  }
  if (reply.status != 200) {
    throw Error(Errc::kSourceUnavailable, "/txns returned " + std::to_string(reply.status));
  }
  std::size_t start = 0;
  const std::string& body = reply.body;
  while (start < body.size()) {
    std::size_t end = body.find('\n', start);
    if (end == std::string::npos) end = body.size();
    if (end > start) out.documents.emplace_back(body, start, end - start);
    start = end + 1;
  }
  out.head = reply.ledger_size.value_or(from + out.documents.size() - 1);
  return out;
}

std::optional<ConsistencyProof> HttpLedgerSource::consistency(std::uint64_t old_size,
                                                              std::uint64_t new_size) {
  auto reply = get("/consistency?old=" + std::to_string(old_size) +
                   "&new=" + std::to_string(new_size));
  if (reply.status == 404) return std::nullopt;
  if (reply.status != 200) {
    throw Error(Errc::kVerificationFailure,
                "source refused consistency proof " + std::to_string(old_size) +
                    " -> " + std::to_string(new_size));
  }
  ConsistencyProof proof;
  try {
    auto body = json::parse(reply.body);
    proof.old_size = body.at("old_size").get<std::uint64_t>();
    proof.new_size = body.at("new_size").get<std::uint64_t>();
    for (const auto& h : body.at("hashes")) {
      auto digest = digest_from_hex(h.get<std::string>());
      if (!digest) throw Error(Errc::kVerificationFailure, "bad hash in proof");
      proof.hashes.push_back(*digest);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::kVerificationFailure, std::string("proof body: ") + e.what());
  }
  return proof;
}

FetchResult fetch_range(LedgerSource& source, SeqNo from, SeqNo to) {
  FetchResult result;
  SeqNo next = from;
  while (next <= to) {
    RangeReply reply = source.fetch(next, to);
    result.head = reply.head;
    if (reply.documents.empty()) break;
    for (const auto& doc : reply.documents) {
      TxnEnvelope env = parse_txn(doc);
      if (env.seq_no != next) {
        throw Error(Errc::kGapDetected, "expected seqNo " + std::to_string(next) +
                                            ", got " + std::to_string(env.seq_no));
      }
      result.envelopes.push_back(std::move(env));
      ++next;
      if (next > to) break;
    }
    if (next > reply.head) break;
  }
  return result;
}

}  // namespace credsearch
