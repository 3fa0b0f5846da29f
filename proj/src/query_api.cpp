#include "credsearch/query_api.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <chrono>
#include <iterator>

#include <fmt/format.h>

#include "credsearch/errors.hpp"
#include "httplib.h"

namespace credsearch {

using nlohmann::json;

namespace {

std::size_t parse_count(std::string_view name, std::string_view text) {
  std::size_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    throw Error(Errc::kInvalidQuery, std::string(name) + " must be a non-negative integer");
  }
  return value;
}

const std::string* single(const Params& params, const std::string& key) {
  auto [lo, hi] = params.equal_range(key);
  if (lo == hi) return nullptr;
  if (std::next(lo) != hi) throw Error(Errc::kInvalidQuery, key + " given more than once");
  return &lo->second;
}

// Messages can quote ledger bytes that are not valid UTF-8.
std::string serialize(const json& value) {
  return value.dump(-1, ' ', false, json::error_handler_t::replace);
}

json error_body(Errc code, std::string_view message) {
  return json{{"error", {{"code", to_string(code)}, {"message", message}}}};
}

ApiResponse error_response(int status, const Error& e) {
  return {status, serialize(error_body(e.code(), e.what()))};
}

ApiResponse unavailable(const SyncStats& stats) {
  json body = error_body(Errc::kVerificationFailure,
                         "ledger copy failed verification; sync is halted: " +
                             stats.fatal_reason);
  body["sync_phase"] = to_string(stats.phase);
  return {503, serialize(body)};
}

// The search response is written directly rather than through json values;
// it is the hot path under load and the object tree costs as much as the
// search itself.
// Length of the well-formed UTF-8 sequence starting at text[i], or 0 when the
// bytes there are not one (overlong forms and surrogates included).
std::size_t utf8_sequence_length(std::string_view text, std::size_t i) {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  const unsigned char lead = byte(i);
  std::size_t len = 0;
  unsigned char lo = 0x80, hi = 0xbf;
  if (lead >= 0xc2 && lead <= 0xdf) {
    len = 2;
  } else if (lead >= 0xe0 && lead <= 0xef) {
    len = 3;
    if (lead == 0xe0) lo = 0xa0;
    if (lead == 0xed) hi = 0x9f;
  } else if (lead >= 0xf0 && lead <= 0xf4) {
    len = 4;
    if (lead == 0xf0) lo = 0x90;
    if (lead == 0xf4) hi = 0x8f;
  } else {
    return 0;
  }
  if (i + len > text.size()) return 0;
  if (byte(i + 1) < lo || byte(i + 1) > hi) return 0;
  for (std::size_t k = 2; k < len; ++k) {
    if (byte(i + k) < 0x80 || byte(i + k) > 0xbf) return 0;
  }
  return len;
}

// Invalid UTF-8 is written as U+FFFD so the body always parses.
void append_json_string(std::string& out, std::string_view text) {
  out += '"';
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80) {
      const std::size_t len = utf8_sequence_length(text, i);
      if (len == 0) {
        out += "\xEF\xBF\xBD";
      } else {
        out.append(text.substr(i, len));
        i += len - 1;
      }
      continue;
    }
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (c < 0x20) {
          fmt::format_to(std::back_inserter(out), "\\u{:04x}", c);
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

void append_hit(std::string& out, const EnrichedDoc& doc, const ScoredHit& hit) {
  fmt::format_to(std::back_inserter(out), "{{\"seq_no\":{},\"score\":{},\"txn_type\":\"{}\"",
                 doc.seq_no, hit.score, to_string(doc.txn_type));
  auto optional_string = [&out](std::string_view key, const std::optional<std::string>& value) {
    if (!value) return;
    fmt::format_to(std::back_inserter(out), ",\"{}\":", key);
    append_json_string(out, *value);
  };
  optional_string("schema_name", doc.schema_name);
  optional_string("schema_version", doc.schema_version);
  out += ",\"attr_names\":[";
  for (std::size_t i = 0; i < doc.attr_names.size(); ++i) {
    if (i != 0) out += ',';
    append_json_string(out, doc.attr_names[i]);
  }
  out += "],\"author_did\":";
  append_json_string(out, doc.author_did.str());
  optional_string("author_alias", doc.author_alias);
  if (doc.ref_schema_seq) {
    fmt::format_to(std::back_inserter(out), ",\"ref_schema_seq\":{}", *doc.ref_schema_seq);
  }
  if (doc.txn_time) fmt::format_to(std::back_inserter(out), ",\"txn_time\":{}", *doc.txn_time);
  out += ",\"highlight\":[";
  for (std::size_t i = 0; i < hit.matched_terms.size(); ++i) {
    const MatchedTerm& m = hit.matched_terms[i];
    if (i != 0) out += ',';
    out += "{\"query\":";
    append_json_string(out, m.query_term);
    out += ",\"term\":";
    append_json_string(out, m.index_term);
    fmt::format_to(std::back_inserter(out), ",\"distance\":{}}}", m.distance);
  }
  out += "]}";
}

json audit_json(const Inclusion& inc) {
  json siblings = json::array();
  for (const auto& h : inc.path.sibling_hashes) siblings.push_back(to_hex(h));
  return json{{"leaf_index", inc.path.leaf_index},
              {"tree_size", inc.tree_size},
              {"siblings", std::move(siblings)}};
}

}  // namespace

Query parse_search_params(const Params& params) {
  Query q;
  const std::string* text = single(params, "q");
  if (text == nullptr || text->find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(Errc::kEmptyQuery, "q must contain at least one search term");
  }
  q.text = *text;
  if (const std::string* type = single(params, "type")) {
    std::set<TxnType> types;
    bool any = false;
    std::size_t start = 0;
    while (start <= type->size()) {
      std::size_t end = type->find(',', start);
      if (end == std::string::npos) end = type->size();
      std::string_view name(type->data() + start, end - start);
      if (name == "any") {
        any = true;
      } else if (auto t = txn_type_from_name(name); t && *t != TxnType::kOther) {
        types.insert(*t);
      } else {
        throw Error(Errc::kInvalidQuery, "unknown type '" + std::string(name) +
                                             "'; expected nym, schema, claim_def, attrib or any");
      }
      start = end + 1;
    }
    if (!any) q.type_filter = std::move(types);
  }
  if (const std::string* limit = single(params, "limit")) q.limit = parse_count("limit", *limit);
  if (const std::string* offset = single(params, "offset")) {
    q.offset = parse_count("offset", *offset);
  }
  if (const std::string* author = single(params, "author")) {
    if (!Did::is_valid(*author)) throw Error(Errc::kInvalidQuery, "author must be a DID");
    q.author = *author;
  }
  q.validate();
  return q;
}

json to_json(const EnrichedDoc& doc) {
  json out{{"seq_no", doc.seq_no},
           {"txn_type", to_string(doc.txn_type)},
           {"attr_names", doc.attr_names},
           {"author_did", doc.author_did.str()}};
  if (doc.schema_name) out["schema_name"] = *doc.schema_name;
  if (doc.schema_version) out["schema_version"] = *doc.schema_version;
  if (doc.author_alias) out["author_alias"] = *doc.author_alias;
  if (doc.ref_schema_seq) out["ref_schema_seq"] = *doc.ref_schema_seq;
  if (doc.txn_time) out["txn_time"] = *doc.txn_time;
  return out;
}

QueryApi::QueryApi(const SyncService& service, ApiOptions options)
    : service_(service), options_(std::move(options)) {
  options_.weights.validate();
}

ApiResponse QueryApi::search(const Params& params) const {
  const auto started = std::chrono::steady_clock::now();
  if (service_.phase() == SyncPhase::kFatal) return unavailable(service_.stats());
  Query query;
  try {
    query = parse_search_params(params);
    std::string body = service_.index().read([&](const InvertedIndex& index) {
      const SearchResult result = index.search(query, options_.weights);
      std::string out;
      out.reserve(512 + 320 * result.hits.size());
      out += "{\"query\":";
      append_json_string(out, query.text);
      fmt::format_to(std::back_inserter(out), ",\"total\":{},\"offset\":{},\"limit\":{},\"hits\":[",
                     result.total, query.offset, query.limit);
      for (std::size_t i = 0; i < result.hits.size(); ++i) {
        if (i != 0) out += ',';
        append_hit(out, *index.find(result.hits[i].seq_no), result.hits[i]);
      }
      out += ']';
      return out;
    });
    fmt::format_to(std::back_inserter(body), ",\"took_ms\":{}}}",
                   std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count());
    return {200, std::move(body)};
  } catch (const Error& e) {
    if (e.code() == Errc::kEmptyQuery || e.code() == Errc::kInvalidQuery) {
      return error_response(400, e);
    }
    throw;
  }
}

ApiResponse QueryApi::txn(std::string_view seq_text) const {
  if (service_.phase() == SyncPhase::kFatal) return unavailable(service_.stats());
  SeqNo seq = 0;
  auto [end, ec] = std::from_chars(seq_text.data(), seq_text.data() + seq_text.size(), seq);
  if (seq_text.empty() || ec != std::errc() || end != seq_text.data() + seq_text.size()) {
    return error_response(400, Error(Errc::kInvalidSeqNo, "seqNo must be an unsigned integer"));
  }
  // seqNo 0 is well-formed but never assigned, so it is simply not found.
  const LedgerCopy* ledger = service_.ledger();
  std::optional<std::string> canonical = ledger ? ledger->document(seq) : std::nullopt;
  if (!canonical) {
    return error_response(
        404, Error(Errc::kUnknownDocument, "no transaction " + std::to_string(seq)));
  }
  const Inclusion inc = ledger->inclusion(seq);
  json enriched = service_.index().read([seq](const InvertedIndex& index) {
    const EnrichedDoc* doc = index.find(seq);
    return doc ? to_json(*doc) : json(nullptr);
  });
  json body{{"seq_no", seq},
            {"raw", json::parse(*canonical)},
            {"canonical", *canonical},
            {"enriched", std::move(enriched)},
            {"audit_path", audit_json(inc)},
            {"root_hash", to_hex(inc.root)}};
  return {200, serialize(body)};
}

ApiResponse QueryApi::stats() const {
  const SyncStats s = service_.stats();
  json body{{"api_version", kApiVersion},
            {"last_seq", s.last_seq},
            {"root_hash", to_hex(s.root)},
            {"doc_count", s.doc_count},
            {"source_size", s.source_size},
            {"sync_phase", to_string(s.phase)},
            {"source_url", s.source_url},
            {"poll_interval_ms", s.poll_interval.count()}};
  if (!s.fatal_reason.empty()) body["fatal_reason"] = s.fatal_reason;
  return {200, serialize(body)};
}

ApiResponse QueryApi::health() const { return {200, "ok", "text/plain"}; }

void QueryApi::mount(httplib::Server& server) const {
  if (!options_.static_dir.empty() && !server.set_mount_point("/", options_.static_dir)) {
    throw Error(Errc::kInvalidConfig, "static directory " + options_.static_dir + " not found");
  }
  auto reply = [this](httplib::Response& res, const ApiResponse& out) {
    res.status = out.status;
    res.set_content(out.body, out.content_type);
    if (options_.cors) res.set_header("Access-Control-Allow-Origin", "*");
  };
  server.Get("/search", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, search(req.params));
  });
  server.Get(R"(/txn/([^/]+))", [this, reply](const httplib::Request& req,
                                               httplib::Response& res) {
    reply(res, txn(req.matches[1].str()));
  });
  server.Get("/stats", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, stats());
  });
  server.Get("/health", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, health());
  });
  server.Options(R"(/.*)", [this](const httplib::Request&, httplib::Response& res) {
    if (options_.cors) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
    res.status = 204;
  });
  server.set_exception_handler(
      [this](const httplib::Request& req, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "unknown error";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        spdlog::error("{} {}: {}", req.method, req.path, what);
        res.status = 500;
        res.set_content(serialize(json{{"error", {{"code", "Internal"}, {"message", what}}}}),
                        "application/json");
        if (options_.cors) res.set_header("Access-Control-Allow-Origin", "*");
      });
  server.set_error_handler([this](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    res.set_content(serialize(json{{"error", {{"code", "NotFound"}, {"message", "no such endpoint"}}}}),
                    "application/json");
    if (options_.cors) res.set_header("Access-Control-Allow-Origin", "*");
  });
}

QueryServer::QueryServer(const SyncService& service, ApiOptions options, std::size_t threads)
    : api_(service, std::move(options)), server_(std::make_unique<httplib::Server>()) {
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  server_->set_keep_alive_max_count(100);
  // Headers and body go out in separate writes; without this the body waits
  // for the peer's delayed ACK.
  server_->set_tcp_nodelay(true);
  api_.mount(*server_);
}

QueryServer::~QueryServer() { stop(); }

int QueryServer::start(const std::string& host, int port) {
  host_ = host;
  int bound = port == 0 ? server_->bind_to_any_port(host)
                        : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(Errc::kInvalidConfig, "cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = bound;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  spdlog::info("query API listening on {}", base_url());
  return bound;
}

bool QueryServer::listen(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  spdlog::info("query API listening on {}", base_url());
  return server_->listen(host, port);
}

void QueryServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string QueryServer::base_url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

}  // namespace credsearch
