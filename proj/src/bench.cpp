#include "credsearch/bench.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/epoll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "credsearch/errors.hpp"
#include "httplib.h"
#include "json.hpp"

namespace credsearch {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

std::string percent_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

std::vector<std::string> pick(const std::set<std::string>& candidates, std::mt19937_64& rng,
                              std::size_t count) {
  std::vector<std::string> all(candidates.begin(), candidates.end());
  std::shuffle(all.begin(), all.end(), rng);
  if (all.size() > count) all.resize(count);
  return all;
}

QueryClass make_class(std::string name, const std::vector<std::string>& texts,
                      std::optional<std::set<TxnType>> types) {
  QueryClass cls{std::move(name), {}};
  for (const auto& text : texts) {
    Query q;
    q.text = text;
    q.type_filter = types;
    cls.queries.push_back(std::move(q));
  }
  return cls;
}

struct Endpoint {
  std::string host;
  int port = 80;
  sockaddr_storage addr{};
  socklen_t addr_len = 0;
};

Endpoint resolve(const std::string& url) {
  std::string rest = url;
  if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
  else if (rest.find("://") != std::string::npos) {
    throw Error(Errc::kInvalidConfig, "only http:// targets are supported: " + url);
  }
  if (auto slash = rest.find('/'); slash != std::string::npos) rest.resize(slash);
  Endpoint ep;
  ep.host = rest;
  if (auto colon = rest.rfind(':'); colon != std::string::npos) {
    ep.host = rest.substr(0, colon);
    try {
      ep.port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(Errc::kInvalidConfig, "bad port in " + url);
    }
  }
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &found) != 0 ||
      found == nullptr) {
    throw Error(Errc::kTargetUnreachable, "cannot resolve " + ep.host);
  }
  std::memcpy(&ep.addr, found->ai_addr, found->ai_addrlen);
  ep.addr_len = found->ai_addrlen;
  freeaddrinfo(found);
  return ep;
}

struct Connection {
  int fd = -1;
  bool connected = false;
  bool busy = false;
  std::string out;
  std::size_t out_offset = 0;
  std::string in;
  Clock::time_point sent{};
  std::size_t query_index = 0;
};

struct SliceResult {
  std::uint64_t requests = 0;
  std::uint64_t errors = 0;
  std::vector<double> latencies_ms;
  // Sampled (query index, body) pairs, checked once the clock has stopped.
  std::vector<std::pair<std::size_t, std::string>> samples;
  std::string first_problem;
};

struct ParsedResponse {
  int status = 0;
  bool close = false;
  std::size_t total_length = 0;
  std::size_t body_offset = 0;
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// nullopt until the whole response is buffered. Chunked bodies are not
// produced by the query API and are reported as malformed.
std::optional<ParsedResponse> parse_response(const std::string& buf, bool& malformed) {
  const std::size_t header_end = buf.find("\r\n\r\n");
  if (header_end == std::string::npos) return std::nullopt;
  ParsedResponse r;
  std::size_t line_end = buf.find("\r\n");
  std::string_view status_line(buf.data(), line_end);
  if (status_line.size() < 12 || status_line.substr(0, 5) != "HTTP/") {
    malformed = true;
    return std::nullopt;
  }
  r.status = std::atoi(std::string(status_line.substr(9, 3)).c_str());
  std::optional<std::size_t> length;
  std::size_t pos = line_end + 2;
  while (pos < header_end) {
    std::size_t eol = buf.find("\r\n", pos);
    std::string_view line(buf.data() + pos, eol - pos);
    pos = eol + 2;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    std::string_view name = line.substr(0, colon);
    std::string_view value = line.substr(colon + 1);
    while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
    if (iequals(name, "Content-Length")) {
      length = std::strtoull(std::string(value).c_str(), nullptr, 10);
    } else if (iequals(name, "Connection") && iequals(value, "close")) {
      r.close = true;
    } else if (iequals(name, "Transfer-Encoding")) {
      malformed = true;
      return std::nullopt;
    }
  }
  r.body_offset = header_end + 4;
  r.total_length = r.body_offset + length.value_or(0);
  if (buf.size() < r.total_length) return std::nullopt;
  return r;
}

class Slice {
 public:
  Slice(const BenchConfig& config, const Endpoint& endpoint, const QueryClass& cls,
        std::size_t connections, const ResponseCheck& check, std::uint64_t seed)
      : config_(config), endpoint_(endpoint), cls_(cls), check_(check), rng_(seed),
        conns_(connections) {
    host_header_ = endpoint.host + ":" + std::to_string(endpoint.port);
    for (const auto& q : cls.queries) targets_.push_back(search_target(q));
  }

  SliceResult run(Clock::time_point deadline) {
    epoll_ = epoll_create1(0);
    if (epoll_ < 0) throw Error(Errc::kInvalidConfig, "epoll_create1 failed");
    deadline_ = deadline;
    for (std::size_t i = 0; i < conns_.size(); ++i) open(i);

    std::vector<epoll_event> events(1024);
    auto next_sweep = Clock::now();
    while (Clock::now() < deadline_) {
      int n = epoll_wait(epoll_, events.data(), static_cast<int>(events.size()), 20);
      if (n < 0 && errno != EINTR) break;
      for (int e = 0; e < n; ++e) handle(events[e].data.u32, events[e].events);
      const auto now = Clock::now();
      if (now >= next_sweep) {
        sweep(now);
        next_sweep = now + std::chrono::milliseconds(100);
      }
    }
    for (auto& c : conns_) {
      if (c.fd >= 0) ::close(c.fd);
    }
    ::close(epoll_);
    return std::move(result_);
  }

 private:
  void problem(std::string what) {
    if (result_.first_problem.empty()) result_.first_problem = std::move(what);
  }

  void open(std::size_t i) {
    Connection& c = conns_[i];
    c = Connection{};
    if (Clock::now() >= deadline_) return;
    c.fd = ::socket(endpoint_.addr.ss_family, SOCK_STREAM | SOCK_NONBLOCK | SOCK_CLOEXEC, 0);
    if (c.fd < 0) {
      ++result_.errors;
      problem(std::string("socket: ") + std::strerror(errno));
      return;
    }
    int one = 1;
    setsockopt(c.fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    int rc = ::connect(c.fd, reinterpret_cast<const sockaddr*>(&endpoint_.addr),
                       endpoint_.addr_len);
    if (rc < 0 && errno != EINPROGRESS) {
      // Left closed; the periodic sweep retries.
      ++result_.errors;
      problem(std::string("connect: ") + std::strerror(errno));
      ::close(c.fd);
      c.fd = -1;
      return;
    }
    c.sent = Clock::now();
    epoll_event ev{};
    ev.events = EPOLLIN | EPOLLOUT | EPOLLET | EPOLLRDHUP;
    ev.data.u32 = static_cast<std::uint32_t>(i);
    epoll_ctl(epoll_, EPOLL_CTL_ADD, c.fd, &ev);
    if (rc == 0) {
      c.connected = true;
      send_next(i);
    }
  }

  void fail(std::size_t i, std::string what) {
    ++result_.errors;
    problem(std::move(what));
    reopen(i);
  }

  void reopen(std::size_t i) {
    Connection& c = conns_[i];
    if (c.fd >= 0) {
      epoll_ctl(epoll_, EPOLL_CTL_DEL, c.fd, nullptr);
      ::close(c.fd);
      c.fd = -1;
    }
    open(i);
  }

  void send_next(std::size_t i) {
    Connection& c = conns_[i];
    if (Clock::now() >= deadline_) return;
    c.query_index = std::uniform_int_distribution<std::size_t>(0, targets_.size() - 1)(rng_);
    c.out = "GET " + targets_[c.query_index] + " HTTP/1.1\r\nHost: " + host_header_ +
            "\r\nConnection: keep-alive\r\n\r\n";
    c.out_offset = 0;
    c.in.clear();
    c.busy = true;
    c.sent = Clock::now();
    flush(i);
  }

  void flush(std::size_t i) {
    Connection& c = conns_[i];
    while (c.out_offset < c.out.size()) {
      ssize_t n = ::send(c.fd, c.out.data() + c.out_offset, c.out.size() - c.out_offset,
                         MSG_NOSIGNAL);
      if (n > 0) {
        c.out_offset += static_cast<std::size_t>(n);
      } else if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
        return;
      } else {
        fail(i, std::string("send: ") + std::strerror(errno));
        return;
      }
    }
  }

  void handle(std::uint32_t i, std::uint32_t events) {
    Connection& c = conns_[i];
    if (c.fd < 0) return;
    if (!c.connected) {
      int err = 0;
      socklen_t len = sizeof(err);
      getsockopt(c.fd, SOL_SOCKET, SO_ERROR, &err, &len);
      if (err != 0) {
        fail(i, std::string("connect: ") + std::strerror(err));
        return;
      }
      if (!(events & EPOLLOUT)) return;
      c.connected = true;
      send_next(i);
      return;
    }
    if ((events & EPOLLOUT) && c.busy && c.out_offset < c.out.size()) flush(i);
    if (c.fd < 0) return;
    if (events & (EPOLLIN | EPOLLRDHUP | EPOLLHUP | EPOLLERR)) receive(i);
  }

  void receive(std::size_t i) {
    Connection& c = conns_[i];
    char buf[16384];
    bool eof = false;
    for (;;) {
      ssize_t n = ::recv(c.fd, buf, sizeof(buf), 0);
      if (n > 0) {
        c.in.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0) {
        eof = true;
        break;
      } else if (errno == EAGAIN || errno == EWOULDBLOCK) {
        break;
      } else {
        if (c.busy) fail(i, std::string("recv: ") + std::strerror(errno));
        else reopen(i);
        return;
      }
    }
    if (c.busy) {
      bool malformed = false;
      auto response = parse_response(c.in, malformed);
      if (malformed) {
        fail(i, "malformed HTTP response");
        return;
      }
      if (response) {
        complete(i, *response);
        return;
      }
      if (eof) {
        fail(i, "connection closed before the response completed");
        return;
      }
    } else if (eof) {
      reopen(i);
    }
  }

  void complete(std::size_t i, const ParsedResponse& r) {
    Connection& c = conns_[i];
    const auto now = Clock::now();
    c.busy = false;
    if (now > deadline_) return;
    ++result_.requests;
    result_.latencies_ms.push_back(std::chrono::duration<double, std::milli>(now - c.sent).count());
    if (r.status != 200) {
      ++result_.errors;
      problem(fmt::format("HTTP {} for {}", r.status, targets_[c.query_index]));
    } else if (check_ && std::uniform_real_distribution<double>(0.0, 1.0)(rng_) <
                             config_.validation_rate) {
      result_.samples.emplace_back(
          c.query_index, c.in.substr(r.body_offset, r.total_length - r.body_offset));
    }
    if (r.close || c.in.size() > r.total_length) {
      reopen(i);
    } else {
      send_next(i);
    }
  }

  void sweep(Clock::time_point now) {
    for (std::size_t i = 0; i < conns_.size(); ++i) {
      Connection& c = conns_[i];
      if (c.fd >= 0 && c.busy && now - c.sent > config_.request_timeout) {
        fail(i, "request timed out");
      } else if (c.fd >= 0 && !c.connected && now - c.sent > config_.request_timeout) {
        fail(i, "connect timed out");
      } else if (c.fd < 0) {
        open(i);
      }
    }
  }

  const BenchConfig& config_;
  const Endpoint& endpoint_;
  const QueryClass& cls_;
  const ResponseCheck& check_;
  std::mt19937_64 rng_;
  std::vector<Connection> conns_;
  std::vector<std::string> targets_;
  std::string host_header_;
  int epoll_ = -1;
  Clock::time_point deadline_{};
  SliceResult result_;
};

double percentile(std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

// Requests sent just before a class ended may still be queued server-side.
// The health check waits in the same queue, so its return means the next
// class starts against an idle server. A target that no longer answers went
// away during the class.
void drain(const Endpoint& endpoint, std::chrono::milliseconds timeout,
           const std::string& class_name) {
  httplib::Client client(endpoint.host, endpoint.port);
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout) +
                          std::chrono::seconds(1));
  auto res = client.Get("/health");
  if (!res) {
    throw Error(Errc::kTargetUnreachable, "target stopped answering during class " + class_name +
                                              ": " + httplib::to_string(res.error()));
  }
}

}  // namespace

std::string search_target(const Query& query) {
  std::string target = "/search?q=" + percent_encode(query.text);
  if (query.type_filter) {
    std::string types;
    for (TxnType t : *query.type_filter) {
      if (!types.empty()) types += ',';
      switch (t) {
        case TxnType::kNym: types += "nym"; break;
        case TxnType::kAttrib: types += "attrib"; break;
        case TxnType::kSchema: types += "schema"; break;
        case TxnType::kClaimDef: types += "claim_def"; break;
        case TxnType::kOther: types += "other"; break;
      }
    }
    target += "&type=" + percent_encode(types);
  }
  target += "&limit=" + std::to_string(query.limit);
  if (query.offset != 0) target += "&offset=" + std::to_string(query.offset);
  if (query.author) target += "&author=" + percent_encode(*query.author);
  return target;
}

std::string adjacent_swap_typo(std::string_view text, std::uint64_t seed) {
  std::size_t best_start = 0, best_len = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    if (i - start > best_len) {
      best_start = start;
      best_len = i - start;
    }
  }
  std::vector<std::size_t> positions;
  for (std::size_t p = best_start; p + 1 < best_start + best_len; ++p) {
    if (std::tolower(static_cast<unsigned char>(text[p])) !=
        std::tolower(static_cast<unsigned char>(text[p + 1]))) {
      positions.push_back(p);
    }
  }
  std::string out(text);
  if (positions.empty()) return out;
  const std::size_t p = positions[seed % positions.size()];
  std::swap(out[p], out[p + 1]);
  return out;
}

std::vector<QueryClass> default_query_classes(std::span<const EnrichedDoc> corpus,
                                              std::uint64_t seed, std::size_t per_class) {
  std::set<std::string> schema_names, cred_def_schema_names, cred_def_attrs, aliases;
  for (const auto& doc : corpus) {
    if (doc.author_alias) aliases.insert(*doc.author_alias);
    if (!doc.schema_name) continue;
    if (doc.txn_type == TxnType::kSchema) schema_names.insert(*doc.schema_name);
    if (doc.txn_type == TxnType::kClaimDef) {
      cred_def_schema_names.insert(*doc.schema_name);
      cred_def_attrs.insert(doc.attr_names.begin(), doc.attr_names.end());
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<std::string> typos;
  std::uint64_t n = 0;
  for (const auto& alias : pick(aliases, rng, per_class)) {
    std::string typo = adjacent_swap_typo(alias, seed + n++);
    if (typo != alias) typos.push_back(std::move(typo));
  }

  std::vector<QueryClass> classes;
  auto add = [&](QueryClass cls) {
    if (!cls.queries.empty()) classes.push_back(std::move(cls));
  };
  add(make_class("schema_or_cred_def_by_name", pick(schema_names, rng, per_class),
                 std::set<TxnType>{TxnType::kSchema, TxnType::kClaimDef}));
  add(make_class("schema_by_name", pick(schema_names, rng, per_class),
                 std::set<TxnType>{TxnType::kSchema}));
  add(make_class("alias_with_typo", typos, std::nullopt));
  add(make_class("cred_def_by_schema_name", pick(cred_def_schema_names, rng, per_class),
                 std::set<TxnType>{TxnType::kClaimDef}));
  add(make_class("cred_def_by_attribute", pick(cred_def_attrs, rng, per_class),
                 std::set<TxnType>{TxnType::kClaimDef}));
  return classes;
}

void BenchConfig::validate() const {
  if (connections == 0) throw Error(Errc::kInvalidConfig, "connections must be positive");
  if (threads == 0) throw Error(Errc::kInvalidConfig, "threads must be positive");
  if (threads > connections) {
    throw Error(Errc::kInvalidConfig, "threads must not exceed connections");
  }
  if (duration < std::chrono::seconds(1)) {
    throw Error(Errc::kInvalidConfig, "duration must be at least one second");
  }
  if (!(validation_rate >= 0.0 && validation_rate <= 1.0)) {
    throw Error(Errc::kInvalidConfig, "validation rate must be within [0, 1]");
  }
}

bool BenchReport::ok() const {
  return std::all_of(classes.begin(), classes.end(), [](const ClassReport& c) {
    return c.errors == 0 && c.mismatches == 0 && c.requests > 0;
  });
}

std::string BenchReport::table() const {
  std::string out = fmt::format("{}\n", environment);
  out += fmt::format("{:<28} {:>10} {:>9} {:>9} {:>9} {:>7} {:>9}\n", "class", "req/s",
                     "p50 ms", "p99 ms", "requests", "errors", "checked");
  for (const auto& c : classes) {
    out += fmt::format("{:<28} {:>10.1f} {:>9.2f} {:>9.2f} {:>9} {:>7} {:>5}/{:<3}\n", c.name,
                       c.req_per_sec, c.p50_ms, c.p99_ms, c.requests, c.errors,
                       c.validated - c.mismatches, c.validated);
    if (!c.first_problem.empty()) out += fmt::format("  first problem: {}\n", c.first_problem);
  }
  return out;
}

std::string BenchReport::csv() const {
  std::string out = "class,req_per_sec,p50_ms,p99_ms\n";
  for (const auto& c : classes) {
    out += fmt::format("{},{:.1f},{:.3f},{:.3f}\n", c.name, c.req_per_sec, c.p50_ms, c.p99_ms);
  }
  return out;
}

OracleCheck::OracleCheck(std::vector<EnrichedDoc> corpus, FieldWeights weights,
                         MatchPolicy policy)
    : oracle_(std::move(corpus), policy), weights_(weights) {}

std::string OracleCheck::operator()(const Query& query, std::string_view body) {
  SearchResult expected;
  {
    std::lock_guard lock(mutex_);
    const std::string key = search_target(query);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, oracle_.search(query, weights_)).first;
    expected = it->second;
  }
  json got;
  try {
    got = json::parse(body);
  } catch (const json::exception& e) {
    return std::string("unparseable body: ") + e.what();
  }
  if (!got.contains("total") || !got.contains("hits")) return "response lacks total or hits";
  if (got["total"].get<std::size_t>() != expected.total) {
    return fmt::format("total {} != expected {}", got["total"].get<std::size_t>(), expected.total);
  }
  const auto& hits = got["hits"];
  if (hits.size() != expected.hits.size()) {
    return fmt::format("{} hits != expected {}", hits.size(), expected.hits.size());
  }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const auto seq = hits[i]["seq_no"].get<SeqNo>();
    const double score = hits[i]["score"].get<double>();
    const auto& want = expected.hits[i];
    if (seq != want.seq_no) {
      return fmt::format("rank {}: seq {} != expected {}", i + 1, seq, want.seq_no);
    }
    if (std::abs(score - want.score) > 1e-9 * std::max(1.0, std::abs(want.score))) {
      return fmt::format("rank {}: score {} != expected {}", i + 1, score, want.score);
    }
  }
  return {};
}

std::vector<std::string> fetch_served_ledger(const std::string& target_url) {
  const Endpoint endpoint = resolve(target_url);
  httplib::Client client(endpoint.host, endpoint.port);
  client.set_connection_timeout(std::chrono::seconds(5));
  client.set_keep_alive(true);
  auto get_json = [&](const std::string& path) {
    auto res = client.Get(path);
    if (!res) {
      throw Error(Errc::kTargetUnreachable,
                  target_url + path + ": " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(Errc::kInvalidConfig,
                  target_url + path + " returned " + std::to_string(res->status));
    }
    return nlohmann::json::parse(res->body);
  };
  const auto last_seq = get_json("/stats").at("last_seq").get<std::uint64_t>();
  std::vector<std::string> docs;
  docs.reserve(last_seq);
  for (std::uint64_t seq = 1; seq <= last_seq; ++seq) {
    docs.push_back(get_json("/txn/" + std::to_string(seq)).at("canonical").get<std::string>());
  }
  return docs;
}

BenchReport run_bench(const BenchConfig& config, const std::vector<QueryClass>& classes,
                      const ResponseCheck& check) {
  config.validate();
  const Endpoint endpoint = resolve(config.target_url);
  {
    httplib::Client client(endpoint.host, endpoint.port);
    client.set_connection_timeout(std::chrono::seconds(5));
    auto res = client.Get("/health");
    if (!res) {
      throw Error(Errc::kTargetUnreachable,
                  config.target_url + ": " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(Errc::kTargetUnreachable,
                  config.target_url + "/health returned " + std::to_string(res->status));
    }
  }

  BenchReport report;
  report.connections = config.connections;
  report.duration = config.duration;
  report.environment = fmt::format(
      "target {}  cores {}  connections {}  threads {}  {:.1f} s per class", config.target_url,
      std::thread::hardware_concurrency(), config.connections, config.threads,
      static_cast<double>(config.duration.count()) / 1000.0);

  std::uint64_t seed = config.seed;
  for (const auto& cls : classes) {
    if (cls.queries.empty()) throw Error(Errc::kInvalidConfig, "class " + cls.name + " is empty");
    spdlog::info("bench class {} ({} queries)", cls.name, cls.queries.size());
    const auto started = Clock::now();
    const auto deadline = started + config.duration;
    std::vector<SliceResult> results(config.threads);
    std::vector<std::thread> workers;
    std::mutex error_mutex;
    std::exception_ptr failure;
    for (std::size_t t = 0; t < config.threads; ++t) {
      const std::size_t share =
          config.connections / config.threads + (t < config.connections % config.threads ? 1 : 0);
      workers.emplace_back([&, t, share, s = seed++] {
        try {
          Slice slice(config, endpoint, cls, share, check, s);
          results[t] = slice.run(deadline);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          failure = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
    const double elapsed = std::chrono::duration<double>(Clock::now() - started).count();
    drain(endpoint, config.request_timeout, cls.name);

    ClassReport row;
    row.name = cls.name;
    std::vector<double> latencies;
    for (auto& r : results) {
      row.requests += r.requests;
      row.errors += r.errors;
      if (row.first_problem.empty()) row.first_problem = r.first_problem;
      for (const auto& [index, body] : r.samples) {
        ++row.validated;
        std::string diff = check(cls.queries[index], body);
        if (!diff.empty()) {
          ++row.mismatches;
          if (row.first_problem.empty()) {
            row.first_problem = search_target(cls.queries[index]) + ": " + diff;
          }
        }
      }
      latencies.insert(latencies.end(), r.latencies_ms.begin(), r.latencies_ms.end());
    }
    std::sort(latencies.begin(), latencies.end());
    row.req_per_sec = static_cast<double>(row.requests) / elapsed;
    row.p50_ms = percentile(latencies, 0.50);
    row.p99_ms = percentile(latencies, 0.99);
    report.classes.push_back(std::move(row));
  }
  return report;
}

}  // namespace credsearch
