#pragma once

// Read-only HTTP/JSON surface over a SyncService: /search, /txn/{seq},
// /stats and /health. Handlers are plain functions of their parameters so
// they can be exercised without a socket; QueryServer wires them to httplib.
// Response shapes are described by the JSON Schemas under schemas/v1.

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include "credsearch/analyzer.hpp"
#include "credsearch/enriched_doc.hpp"
#include "credsearch/scoring.hpp"
#include "credsearch/sync.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace credsearch {

inline constexpr std::string_view kApiVersion = "v1";

using Params = std::multimap<std::string, std::string>;

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ApiOptions {
  FieldWeights weights{};
  // Adds Access-Control-Allow-Origin: * so a browser UI on another origin can
  // call the API.
  bool cors = true;
  // When set, files under this directory are served for GET requests that
  // match no API route (a static browser UI, for example).
  std::string static_dir;
};

// Throws Error(kEmptyQuery) or Error(kInvalidQuery).
Query parse_search_params(const Params& params);

nlohmann::json to_json(const EnrichedDoc& doc);

class QueryApi {
 public:
  QueryApi(const SyncService& service, ApiOptions options = {});

  ApiResponse search(const Params& params) const;
  ApiResponse txn(std::string_view seq_text) const;
  ApiResponse stats() const;
  // Liveness only: 200 "ok" whenever the process answers. A halted sync is
  // reported through /stats and by /search refusing with 503.
  ApiResponse health() const;

  void mount(httplib::Server& server) const;
  const ApiOptions& options() const { return options_; }

 private:
  const SyncService& service_;
  ApiOptions options_;
};

class QueryServer {
 public:
  QueryServer(const SyncService& service, ApiOptions options = {}, std::size_t threads = 64);
  ~QueryServer();
  QueryServer(const QueryServer&) = delete;
  QueryServer& operator=(const QueryServer&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port);
  bool listen(const std::string& host, int port);
  void stop();
  std::string base_url() const;

 private:
  QueryApi api_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = 0;
};

}  // namespace credsearch
