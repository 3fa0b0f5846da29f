#include <spdlog/spdlog.h>

#include <charconv>
#include <mutex>

#include "credsearch/errors.hpp"
#include "credsearch/ledger_sim.hpp"
#include "httplib.h"

namespace credsearch {

using nlohmann::json;

namespace {

std::optional<std::uint64_t> parse_u64(const std::string& text) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return value;
}

void reply_error(httplib::Response& res, int status, const std::string& message,
                 std::uint64_t size) {
  res.status = status;
  res.set_header("X-Ledger-Size", std::to_string(size));
  res.set_content(json{{"error", message}, {"size", size}}.dump(),
                  "application/json");
}

}  // namespace

SimServer::SimServer(SimLedger ledger, SimServerOptions options)
    : options_(options),
      documents_(ledger.documents()),
      tree_(ledger.tree()),
      server_(std::make_unique<httplib::Server>()) {
  // Validation state for appends mirrors SimLedger::validate: every DID a NYM
  // registered may author later transactions.
  for (const auto& doc : documents_) {
    auto entry = classify(parse_txn(doc));
    types_.push_back(entry.envelope.txn_type);
    if (const auto* nym = std::get_if<NymData>(&entry.payload)) {
      introduced_dids_.insert(nym->dest.str());
    }
  }
  server_->set_tcp_nodelay(true);
  install_routes();
}

SimServer::~SimServer() { stop(); }

std::uint64_t SimServer::size() const {
  std::shared_lock lock(mutex_);
  return documents_.size();
}

Digest SimServer::root() const { return tree_.root(); }

std::string SimServer::base_url() const {
  return "http://" + host_ + ":" + std::to_string(port_.load());
}

SimServer::Validation SimServer::validate_append(const TxnEnvelope& env) const {
  if (env.seq_no != documents_.size() + 1) {
    return {false, "seqNo must be " + std::to_string(documents_.size() + 1)};
  }
  std::optional<LedgerEntry> entry;
  try {
    entry = classify(env);
  } catch (const Error& e) {
    return {false, e.what()};
  }
  if (!introduced_dids_.contains(env.author_did.str())) {
    return {false, "author not introduced by an earlier NYM"};
  }
  if (const auto* cd = std::get_if<ClaimDefData>(&entry->payload)) {
    if (types_[cd->schema_ref - 1] != TxnType::kSchema) {
      return {false, "ref does not name a SCHEMA"};
    }
  }
  return {true, {}};
}

void SimServer::install_routes() {
  auto& server = *server_;

  server.Get("/size", [this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(mutex_);
    res.set_content(json{{"size", documents_.size()},
                         {"root_hash", to_hex(tree_.root())}}
                        .dump(),
                    "application/json");
  });

  server.Get("/genesis", [this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(mutex_);
    std::string body;
    std::uint64_t emitted = 0;
    for (std::size_t i = 0; i < documents_.size() && emitted < options_.genesis_count;
         ++i) {
      if (types_[i] != TxnType::kNym) break;
      body += documents_[i];
      body += '\n';
      ++emitted;
    }
    res.set_content(body, "application/x-ndjson");
  });

  server.Get("/txns", [this](const httplib::Request& req, httplib::Response& res) {
    std::shared_lock lock(mutex_);
    const std::uint64_t size = documents_.size();
    auto from = parse_u64(req.get_param_value("from"));
    auto to = parse_u64(req.get_param_value("to"));
    if (!from || !to || *from == 0 || *from > *to) {
      reply_error(res, 400, "malformed range", size);
      return;
    }
    if (*from > size) {
      reply_error(res, 416, "range starts beyond head", size);
      return;
    }
    std::uint64_t last = std::min({*to, size, *from + options_.max_batch - 1});
    std::string body;
    for (std::uint64_t seq = *from; seq <= last; ++seq) {
      body += documents_[seq - 1];
      body += '\n';
    }
    res.set_header("X-Ledger-Size", std::to_string(size));
    res.set_content(body, "application/x-ndjson");
  });

  server.Get("/consistency",
             [this](const httplib::Request& req, httplib::Response& res) {
               std::shared_lock lock(mutex_);
               auto old_size = parse_u64(req.get_param_value("old"));
               auto new_size = parse_u64(req.get_param_value("new"));
               if (!old_size || !new_size) {
                 reply_error(res, 400, "old and new required", documents_.size());
                 return;
               }
               try {
                 auto proof = tree_.consistency_proof(*old_size, *new_size);
                 json hashes = json::array();
                 for (const auto& h : proof.hashes) hashes.push_back(to_hex(h));
                 res.set_content(json{{"old_size", proof.old_size},
                                      {"new_size", proof.new_size},
                                      {"hashes", hashes}}
                                     .dump(),
                                 "application/json");
               } catch (const Error& e) {
                 reply_error(res, 416, e.what(), documents_.size());
               }
             });

  server.Post("/txns", [this](const httplib::Request& req, httplib::Response& res) {
    if (!options_.mutable_ledger) {
      reply_error(res, 405, "simulator started without --mutable", size());
      return;
    }
    std::unique_lock lock(mutex_);
    TxnEnvelope env;
    try {
      env = parse_txn(req.body);
    } catch (const Error& e) {
      reply_error(res, 422, e.what(), documents_.size());
      return;
    }
    auto verdict = validate_append(env);
    if (!verdict.ok) {
      reply_error(res, 422, verdict.message, documents_.size());
      return;
    }
    auto entry = classify(env);
    std::string canonical = canonical_leaf_bytes(env);
    tree_.append(canonical);
    documents_.push_back(std::move(canonical));
    types_.push_back(env.txn_type);
    if (const auto* nym = std::get_if<NymData>(&entry.payload)) {
      introduced_dids_.insert(nym->dest.str());
    }
    res.status = 201;
    res.set_content(json{{"seq_no", env.seq_no},
                         {"size", documents_.size()},
                         {"root_hash", to_hex(tree_.root())}}
                        .dump(),
                    "application/json");
  });
}

int SimServer::start(const std::string& host, int port) {
  host_ = host;
  int bound = port == 0 ? server_->bind_to_any_port(host)
                        : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(Errc::kInvalidConfig, "cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = bound;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  spdlog::info("ledger simulator serving {} transactions on {}", size(), base_url());
  return bound;
}

bool SimServer::listen(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  spdlog::info("ledger simulator serving {} transactions on {}:{}", size(), host, port);
  return server_->listen(host, port);
}

void SimServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace credsearch
