#include "credsearch/ledger_store.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "credsearch/errors.hpp"
#include "json.hpp"

namespace credsearch {

namespace fs = std::filesystem;
using nlohmann::json;

LedgerStore::LedgerStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(Errc::kPersistenceFailure, dir_.string() + ": " + ec.message());

  if (fs::exists(checkpoint_path())) {
    std::ifstream in(checkpoint_path());
    std::stringstream text;
    text << in.rdbuf();
    try {
      auto body = json::parse(text.str());
      checkpoint_.last_seq = body.at("last_seq").get<std::uint64_t>();
      checkpoint_.byte_length = body.at("byte_length").get<std::uint64_t>();
      auto root = digest_from_hex(body.at("root_hash").get<std::string>());
      if (!root) throw Error(Errc::kVerificationFailure, "checkpoint root is not hex");
      checkpoint_.root = *root;
    } catch (const json::exception& e) {
      throw Error(Errc::kVerificationFailure, std::string("checkpoint: ") + e.what());
    }
  }

  const fs::path ledger = ledger_path();
  const std::uint64_t actual = fs::exists(ledger) ? fs::file_size(ledger) : 0;
  if (actual < checkpoint_.byte_length) {
    throw Error(Errc::kVerificationFailure,
                "ledger copy is shorter than its checkpoint (" + std::to_string(actual) +
                    " < " + std::to_string(checkpoint_.byte_length) + " bytes)");
  }
  if (actual > checkpoint_.byte_length) {
    fs::resize_file(ledger, checkpoint_.byte_length, ec);
    if (ec) throw Error(Errc::kPersistenceFailure, ledger.string() + ": " + ec.message());
  }
}

std::vector<std::string> LedgerStore::load() const {
  std::vector<std::string> lines;
  if (checkpoint_.byte_length == 0) return lines;
  std::ifstream in(ledger_path(), std::ios::binary);
  if (!in) throw Error(Errc::kPersistenceFailure, "cannot read " + ledger_path().string());
  std::string content(checkpoint_.byte_length, '\0');
  in.read(content.data(), static_cast<std::streamsize>(content.size()));
  if (in.gcount() != static_cast<std::streamsize>(content.size())) {
    throw Error(Errc::kPersistenceFailure, "short read of " + ledger_path().string());
  }
  if (content.back() != '\n') {
    throw Error(Errc::kVerificationFailure, "ledger copy does not end with a newline");
  }
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    lines.emplace_back(content, start, end - start);
    start = end + 1;
  }
  return lines;
}

void LedgerStore::append(std::span<const std::string> canonical_docs,
                         const Digest& new_root) {
  if (canonical_docs.empty()) return;
  Checkpoint next = checkpoint_;
  try {
    std::ofstream out(ledger_path(), std::ios::binary | std::ios::app);
    if (!out) throw Error(Errc::kPersistenceFailure, "cannot open " + ledger_path().string());
    for (const auto& doc : canonical_docs) {
      if (doc.find('\n') != std::string::npos) {
        throw Error(Errc::kPersistenceFailure, "document contains a newline");
      }
      out.write(doc.data(), static_cast<std::streamsize>(doc.size()));
      out.put('\n');
      next.byte_length += doc.size() + 1;
    }
    out.flush();
    if (!out) throw Error(Errc::kPersistenceFailure, "write to " + ledger_path().string());
    out.close();
    next.last_seq += canonical_docs.size();
    next.root = new_root;
    write_checkpoint(next);
  } catch (...) {
    std::error_code ec;
    if (fs::exists(ledger_path(), ec)) fs::resize_file(ledger_path(), checkpoint_.byte_length, ec);
    try {
      throw;
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(Errc::kPersistenceFailure, e.what());
    }
  }
  checkpoint_ = next;
}

void LedgerStore::write_checkpoint(const Checkpoint& next) {
  const fs::path tmp = dir_ / (std::string(kCheckpointFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kPersistenceFailure, "cannot open " + tmp.string());
    out << json{{"last_seq", next.last_seq},
                {"root_hash", to_hex(next.root)},
                {"byte_length", next.byte_length}}
               .dump()
        << '\n';
    out.flush();
    if (!out) throw Error(Errc::kPersistenceFailure, "write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, checkpoint_path(), ec);
  if (ec) throw Error(Errc::kPersistenceFailure, "rename checkpoint: " + ec.message());
}

}  // namespace credsearch
