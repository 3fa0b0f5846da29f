// credsearch: ledger simulator, sync service, query API and load generator.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "credsearch/bench.hpp"
#include "credsearch/enrich.hpp"
#include "credsearch/errors.hpp"
#include "credsearch/ledger_sim.hpp"
#include "credsearch/query_api.hpp"
#include "credsearch/sync.hpp"

namespace {

using namespace credsearch;

// Exit codes beyond CLI11's own.
constexpr int kExitFatal = 3;
constexpr int kExitUnreachable = 4;
constexpr int kExitErrors = 5;

sigset_t termination_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  return set;
}

void wait_for_termination() {
  sigset_t set = termination_signals();
  int sig = 0;
  sigwait(&set, &sig);
  spdlog::info("received signal {}, shutting down", sig);
}

struct CorpusOptions {
  std::uint64_t seed = 42;
  std::uint64_t count = 0;
  std::optional<std::uint64_t> orgs;
  std::optional<std::uint64_t> schemas;
  std::optional<std::uint64_t> claim_defs_per_schema;
  std::string ledger_file;
};

void add_corpus_options(CLI::App* cmd, CorpusOptions& opts) {
  cmd->add_option("--seed", opts.seed, "Generator seed");
  cmd->add_option("--count", opts.count,
                  "Generate exactly this many transactions (0 = small default ledger)");
  cmd->add_option("--orgs", opts.orgs, "Issuer organisations to generate");
  cmd->add_option("--schemas", opts.schemas, "SCHEMA transactions to generate");
  cmd->add_option("--claim-defs-per-schema", opts.claim_defs_per_schema,
                  "CLAIM_DEF transactions per schema");
  cmd->add_option("--ledger-file", opts.ledger_file,
                  "Serve documents from an NDJSON file instead of generating");
}

SimLedger load_corpus(const CorpusOptions& opts) {
  if (!opts.ledger_file.empty()) {
    std::ifstream in(opts.ledger_file);
    if (!in) throw Error(Errc::kInvalidConfig, "cannot read " + opts.ledger_file);
    std::vector<std::string> docs;
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) docs.push_back(line);
    }
    return SimLedger(std::move(docs));
  }
  GeneratorConfig config;
  config.seed = opts.seed;
  if (opts.count > 0) {
    if (opts.orgs || opts.schemas || opts.claim_defs_per_schema) {
      throw Error(Errc::kInvalidConfig, "--count derives the mix; drop the per-type counts");
    }
    config = GeneratorConfig::sized(opts.count, opts.seed);
  }
  if (opts.orgs) config.n_orgs = *opts.orgs;
  if (opts.schemas) config.n_schemas = *opts.schemas;
  if (opts.claim_defs_per_schema) config.claim_defs_per_schema = *opts.claim_defs_per_schema;
  return generate(config);
}

struct SyncOptions {
  std::string ledger_url = "http://127.0.0.1:9700";
  std::string data_dir = "credsearch-data";
  std::uint64_t poll_ms = 10000;
  std::uint64_t batch_size = 1000;
  std::uint64_t retry_base_ms = 250;
  int retry_attempts = 5;
};

void add_sync_options(CLI::App* cmd, SyncOptions& opts) {
  cmd->add_option("--ledger-url", opts.ledger_url,
                  "Base URL of the ledger source (CREDSEARCH_LEDGER_URL wins when set)");
  cmd->add_option("--data-dir", opts.data_dir,
                  "Directory holding the local ledger copy (CREDSEARCH_DATA_DIR wins when set)");
  auto* seconds = cmd->add_option_function<double>(
      "--poll-interval",
      [&opts](double s) {
        if (!(s > 0.0)) throw CLI::ValidationError("--poll-interval", "must be positive");
        opts.poll_ms = static_cast<std::uint64_t>(s * 1000.0);
      },
      "Steady-state poll interval in seconds");
  cmd->add_option("--poll-interval-ms", opts.poll_ms, "Steady-state poll interval in milliseconds")
      ->excludes(seconds);
  cmd->add_option("--batch-size", opts.batch_size, "Transactions fetched per request")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--retry-base-ms", opts.retry_base_ms, "First retry delay for source errors");
  cmd->add_option("--retry-attempts", opts.retry_attempts, "Attempts per source request")
      ->check(CLI::PositiveNumber);
}

// The environment takes precedence over the command line for these two.
void apply_env_overrides(SyncOptions& opts) {
  if (const char* url = std::getenv("CREDSEARCH_LEDGER_URL"); url && *url) opts.ledger_url = url;
  if (const char* dir = std::getenv("CREDSEARCH_DATA_DIR"); dir && *dir) opts.data_dir = dir;
}

std::unique_ptr<SyncService> make_sync(const SyncOptions& opts) {
  SyncConfig config;
  config.data_dir = opts.data_dir;
  config.poll_interval = std::chrono::milliseconds(opts.poll_ms);
  config.batch_size = opts.batch_size;
  RetryPolicy retry;
  retry.base_delay = std::chrono::milliseconds(opts.retry_base_ms);
  retry.max_attempts = opts.retry_attempts;
  return std::make_unique<SyncService>(
      config, std::make_unique<HttpLedgerSource>(opts.ledger_url, retry));
}

int run_sim(const CorpusOptions& corpus, const std::string& host, int port,
            SimServerOptions options) {
  SimLedger ledger = load_corpus(corpus);
  SimServer server(std::move(ledger), options);
  const int bound = server.start(host, port);
  std::cout << "listening " << host << ":" << bound << std::endl;
  wait_for_termination();
  server.stop();
  return 0;
}

int run_sync(const SyncOptions& opts, bool once) {
  auto service = make_sync(opts);
  if (once) {
    service->open();
    while (service->run_cycle()) {
    }
    if (service->phase() != SyncPhase::kFatal) service->run_cycle();
    const SyncStats s = service->stats();
    std::cout << "last_seq " << s.last_seq << " root " << to_hex(s.root) << " docs "
              << s.doc_count << " phase " << to_string(s.phase) << std::endl;
    return s.phase == SyncPhase::kFatal ? kExitFatal : 0;
  }
  service->start();
  wait_for_termination();
  service->stop();
  return service->phase() == SyncPhase::kFatal ? kExitFatal : 0;
}

int run_serve(const SyncOptions& opts, const std::string& host, int port, std::size_t threads,
              bool no_cors, const std::string& ui_dir) {
  auto service = make_sync(opts);
  ApiOptions api;
  api.cors = !no_cors;
  api.static_dir = ui_dir;
  service->start();
  QueryServer server(*service, api, threads);
  const int bound = server.start(host, port);
  std::cout << "listening " << host << ":" << bound << std::endl;
  wait_for_termination();
  server.stop();
  service->stop();
  return 0;
}

// Without corpus flags the driver reads the corpus back from the target, so its
// queries and expected answers match whatever the target indexed.
int run_bench_cmd(const std::optional<CorpusOptions>& corpus, BenchConfig config,
                  const std::string& csv_path, bool no_validate) {
  const std::vector<std::string> ledger =
      corpus ? load_corpus(*corpus).documents() : fetch_served_ledger(config.target_url);
  std::vector<EnrichedDoc> docs = enrich_ledger(ledger);
  std::vector<QueryClass> classes = default_query_classes(docs);
  ResponseCheck check;
  if (!no_validate) {
    check = [oracle = std::make_shared<OracleCheck>(docs)](const Query& q,
                                                           std::string_view body) {
      return (*oracle)(q, body);
    };
  }
  BenchReport report = run_bench(config, classes, check);
  std::cout << "corpus " << docs.size() << " indexed documents of " << ledger.size()
            << " transactions\n"
            << report.table();
  const std::string csv = report.csv();
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    out << csv;
  } else {
    std::cout << '\n' << csv;
  }
  if (!report.ok()) {
    std::cerr << to_string(Errc::kNonZeroErrorRate)
              << ": some requests failed or disagreed with the reference scorer\n";
    return kExitErrors;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // Block termination signals before any thread starts so sigwait sees them.
  sigset_t signals = termination_signals();
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::signal(SIGPIPE, SIG_IGN);

  CLI::App app{"Full-text search over credential ledger metadata"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, critical, off");

  CorpusOptions corpus;
  std::string host = "127.0.0.1";
  int port = 0;

  auto* sim = app.add_subcommand("sim", "Serve a generated ledger over HTTP");
  add_corpus_options(sim, corpus);
  SimServerOptions sim_options;
  sim->add_option("--host", host, "Bind address");
  sim->add_option("--port", port, "Port (0 = pick a free port)")->default_val(9700);
  sim->add_option("--max-batch", sim_options.max_batch, "Cap on transactions per /txns reply");
  sim->add_option("--genesis-count", sim_options.genesis_count, "Leading NYMs served by /genesis");
  sim->add_flag("--mutable", sim_options.mutable_ledger, "Accept POST /txns appends");

  auto* gen = app.add_subcommand("generate", "Write a generated ledger as NDJSON");
  add_corpus_options(gen, corpus);
  std::string out_path;
  gen->add_option("-o,--out", out_path, "Output file (default stdout)");

  SyncOptions sync_opts;
  auto* sync = app.add_subcommand("sync", "Mirror the ledger into the local copy and index");
  add_sync_options(sync, sync_opts);
  bool once = false;
  sync->add_flag("--once", once, "Catch up to the source head and exit");

  auto* serve = app.add_subcommand("serve", "Sync continuously and serve the query API");
  add_sync_options(serve, sync_opts);
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 = pick a free port)")->default_val(8080);
  std::size_t threads = 64;
  serve->add_option("--threads", threads, "HTTP worker threads")->check(CLI::PositiveNumber);
  bool no_cors = false;
  serve->add_flag("--no-cors", no_cors, "Omit Access-Control-Allow-Origin");
  std::string ui_dir;
  serve->add_option("--ui-dir", ui_dir, "Serve static files (a browser UI) from this directory")
      ->check(CLI::ExistingDirectory);

  auto* bench = app.add_subcommand("bench", "Load-test a running query API");
  add_corpus_options(bench, corpus);
  BenchConfig bench_config;
  double duration_s = 30.0;
  std::string csv_path;
  bool no_validate = false;
  bench->add_option("--url,--target", bench_config.target_url, "Query API base URL");
  bench->add_option("--connections", bench_config.connections, "Concurrent connections");
  bench->add_option("--threads", bench_config.threads, "Client event-loop threads");
  bench->add_option("--duration", duration_s, "Seconds per query class");
  bench->add_option("--validation-rate", bench_config.validation_rate,
                    "Fraction of responses checked against the reference scorer");
  bench->add_option("--out,--csv", csv_path, "Write the CSV report here");
  bench->add_flag("--no-validate", no_validate, "Skip response validation");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*sim) return run_sim(corpus, host, port, sim_options);
    if (*gen) {
      SimLedger ledger = load_corpus(corpus);
      std::ofstream file;
      if (!out_path.empty()) file.open(out_path);
      std::ostream& out = out_path.empty() ? std::cout : file;
      for (const auto& doc : ledger.documents()) out << doc << '\n';
      return out ? 0 : 1;
    }
    apply_env_overrides(sync_opts);
    if (*sync) return run_sync(sync_opts, once);
    if (*serve) return run_serve(sync_opts, host, port, threads, no_cors, ui_dir);
    if (*bench) {
      bench_config.duration =
          std::chrono::milliseconds(static_cast<std::int64_t>(duration_s * 1000.0));
      bool local = false;
      for (const char* flag : {"--seed", "--count", "--orgs", "--schemas",
                               "--claim-defs-per-schema", "--ledger-file"}) {
        local = local || bench->count(flag) > 0;
      }
      return run_bench_cmd(local ? std::optional(corpus) : std::nullopt, bench_config, csv_path,
                           no_validate);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return e.code() == Errc::kTargetUnreachable ? kExitUnreachable : 1;
  }
  return 0;
}
