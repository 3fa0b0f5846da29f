#include "credsearch/ledger_sim.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <unordered_set>

#include "credsearch/errors.hpp"

namespace credsearch {

using nlohmann::json;

namespace {

constexpr std::string_view kBase58 =
    "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
constexpr std::int64_t kEpoch = 1500000000;

// std distributions are implementation defined; the generator must be
// byte-identical across standard libraries, so draws use the raw engine.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }
  std::uint8_t byte() { return static_cast<std::uint8_t>(engine_() & 0xff); }

 private:
  std::mt19937_64 engine_;
};

std::string base58(const std::vector<std::uint8_t>& bytes) {
  std::vector<std::uint8_t> digits;  // little endian base58 digits
  for (auto byte : bytes) {
    int carry = byte;
    for (auto& d : digits) {
      carry += d * 256;
      d = static_cast<std::uint8_t>(carry % 58);
      carry /= 58;
    }
    while (carry > 0) {
      digits.push_back(static_cast<std::uint8_t>(carry % 58));
      carry /= 58;
    }
  }
  std::string out;
  for (auto byte : bytes) {
    if (byte != 0) break;
    out.push_back('1');
  }
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    out.push_back(kBase58[*it]);
  }
  return out;
}

std::string random_base58(Rng& rng, std::size_t n_bytes) {
  std::vector<std::uint8_t> bytes(n_bytes);
  for (auto& b : bytes) b = rng.byte();
  return base58(bytes);
}

Did random_did(Rng& rng) {
  for (;;) {
    if (auto did = Did::parse(random_base58(rng, 16))) return *did;
  }
}

json envelope_json(SeqNo seq, std::string_view type, const Did& author,
                   json data, std::int64_t txn_time, Rng* rng) {
  json doc;
  doc["txn"] = {{"type", std::string(type)},
                {"data", std::move(data)},
                {"metadata", {{"from", author.str()},
                              {"reqId", kEpoch * 1000 + static_cast<std::int64_t>(seq)}}},
                {"protocolVersion", 2}};
  doc["txnMetadata"] = {{"seqNo", seq}, {"txnTime", txn_time}};
  if (rng != nullptr) {
    doc["reqSignature"] = {
        {"type", "ED25519"},
        {"values", json::array({{{"from", author.str()},
                                 {"value", random_base58(*rng, 64)}}})}};
  }
  doc["ver"] = "1";
  return doc;
}

json nym_data(const Did& dest, const std::optional<std::string>& alias,
              const std::optional<std::string>& role, const std::string& verkey) {
  json data = {{"dest", dest.str()}, {"verkey", verkey}};
  if (alias) data["alias"] = *alias;
  data["role"] = role ? json(*role) : json(nullptr);
  return data;
}

json schema_data(const std::string& name, const std::string& version,
                 const std::vector<std::string>& attrs) {
  return {{"data",
           {{"name", name}, {"version", version}, {"attr_names", attrs}}}};
}

}  // namespace

std::vector<std::string> default_alias_vocab() {
  return {"Desert Schools Credit Union",
          "Technische Universitaet Berlin",
          "Telekom Innovation Laboratories",
          "Evernym",
          "Government of British Columbia",
          "Province of Ontario",
          "Mountain View Community Bank",
          "Northern Trust Savings",
          "Humboldt University",
          "City of Vienna Registry Office",
          "Global Shipping Alliance",
          "Alpine Health Insurance",
          "Sovereign Bank of Lagos",
          "Pacific Coast University",
          "Bavarian Employers Association",
          "Helsinki Energy Cooperative",
          "Atlantic Maritime Authority",
          "Lakeside Medical Center",
          "Federal Chamber of Commerce",
          "Andrea Weber",
          "Marcus Lindqvist",
          "Priya Raman",
          "Jonathan Okafor",
          "Sofia Marquez",
          "Kenji Watanabe"};
}

std::vector<std::string> default_schema_name_vocab() {
  return {"ID card",
          "proof of employment",
          "proof of matriculation",
          "proof of enrollment",
          "driver license",
          "bank account",
          "university degree",
          "health insurance card",
          "residence permit",
          "membership certificate",
          "vaccination record",
          "tax identification",
          "professional license",
          "transcript of records",
          "business registration"};
}

std::vector<std::string> default_attr_vocab() {
  return {"name",        "company",     "title",       "date_of_birth",
          "address",     "nationality", "start_date",  "salary",
          "student_id",  "degree",      "university",  "expiry_date",
          "license_class", "iban",      "account_holder", "member_since",
          "vaccine",     "tax_number",  "grade",       "registration_number",
          "first_name",  "last_name",   "email",       "phone"};
}

GeneratorConfig GeneratorConfig::sized(std::uint64_t count, std::uint64_t seed) {
  if (count == 0) throw Error(Errc::kInvalidConfig, "count must be >= 1");
  GeneratorConfig config;
  config.seed = seed;
  std::uint64_t nyms = std::max<std::uint64_t>(1, count * 60 / 100);
  std::uint64_t schemas = count * 15 / 100;
  std::uint64_t claim_defs = schemas > 0 ? count * 20 / 100 : 0;
  std::uint64_t attribs = count - nyms - schemas - claim_defs;
  std::uint64_t other_nyms = nyms - 1;
  config.n_orgs = other_nyms / 5;
  if (schemas > 0 && config.n_orgs == 0 && other_nyms > 0) config.n_orgs = 1;
  config.n_alias_updates = config.n_orgs > 0 ? other_nyms / 50 : 0;
  config.n_plain_nyms = other_nyms - config.n_orgs - config.n_alias_updates;
  config.n_schemas = schemas;
  config.claim_defs_per_schema = 0;
  config.n_claim_defs = claim_defs;
  config.n_attribs = attribs;
  return config;
}

std::uint64_t GeneratorConfig::claim_def_count() const {
  return n_claim_defs ? *n_claim_defs : n_schemas * claim_defs_per_schema;
}

std::uint64_t GeneratorConfig::total_count() const {
  return 1 + n_orgs + n_plain_nyms + n_alias_updates + n_schemas +
         claim_def_count() + n_attribs;
}

std::string make_schema_txn(SeqNo seq, const Did& author,
                            const std::string& name, const std::string& version,
                            const std::vector<std::string>& attrs,
                            std::int64_t txn_time) {
  json doc = envelope_json(seq, to_wire(TxnType::kSchema), author,
                           schema_data(name, version, attrs), txn_time, nullptr);
  doc["txnMetadata"]["txnId"] = author.str() + ":2:" + name + ":" + version;
  return doc.dump();
}

std::string make_nym_txn(SeqNo seq, const Did& author, const Did& dest,
                         const std::optional<std::string>& alias,
                         std::int64_t txn_time) {
  return envelope_json(seq, to_wire(TxnType::kNym), author,
                       nym_data(dest, alias, std::nullopt, "~" + dest.str()),
                       txn_time, nullptr)
      .dump();
}

SimLedger generate(const GeneratorConfig& config) {
  const std::uint64_t claim_defs = config.claim_def_count();
  if (config.n_schemas > 0 &&
      (config.schema_name_vocab.empty() || config.attr_vocab.empty())) {
    throw Error(Errc::kInvalidConfig, "schemas need name and attribute vocab");
  }
  if (config.n_orgs > 0 && config.alias_vocab.empty()) {
    throw Error(Errc::kInvalidConfig, "orgs need an alias vocab");
  }
  if (claim_defs > 0 && config.n_schemas == 0) {
    throw Error(Errc::kInvalidConfig, "claim defs need schemas");
  }
  if (config.n_alias_updates > 0 && config.n_orgs == 0) {
    throw Error(Errc::kInvalidConfig, "alias updates need orgs");
  }
  for (const auto& attr : config.attr_vocab) {
    if (attr.empty()) throw Error(Errc::kInvalidConfig, "empty attribute name");
  }
  {
    std::set<std::string> unique(config.attr_vocab.begin(), config.attr_vocab.end());
    if (unique.size() != config.attr_vocab.size()) {
      throw Error(Errc::kInvalidConfig, "duplicate attribute names in vocab");
    }
  }

  Rng rng(config.seed);
  std::vector<std::string> docs;
  docs.reserve(config.total_count());
  auto next_time = [&](SeqNo seq) {
    return kEpoch + static_cast<std::int64_t>(seq) * 600 +
           static_cast<std::int64_t>(rng.below(600));
  };

  const Did fixture = random_did(rng);
  docs.push_back(envelope_json(1, to_wire(TxnType::kNym), fixture,
                               nym_data(fixture, std::string(kFixtureAlias),
                                        std::string("0"),
                                        "~" + random_base58(rng, 16)),
                               next_time(1), &rng)
                     .dump());

  std::vector<Did> stewards{fixture};
  std::vector<Did> orgs;
  std::vector<std::string> org_alias;
  std::vector<Did> registered{fixture};
  struct SchemaInfo {
    SeqNo seq;
    std::vector<std::string> attrs;
    std::string name;
    std::string version;
    std::uint64_t quota;
  };
  std::vector<SchemaInfo> schemas;
  std::vector<std::size_t> open_schemas;  // indices with remaining quota
  std::map<std::string, int> versions_per_name;

  enum Kind { kOrg, kPlain, kUpdate, kSchema, kClaimDef, kAttrib, kKinds };
  std::array<std::uint64_t, kKinds> remaining{
      config.n_orgs,    config.n_plain_nyms, config.n_alias_updates,
      config.n_schemas, claim_defs,          config.n_attribs};

  auto pick_org_or_fixture = [&]() -> const Did& {
    if (orgs.empty()) return fixture;
    return orgs[rng.below(orgs.size())];
  };

  for (;;) {
    std::array<std::uint64_t, kKinds> weight = remaining;
    if (orgs.empty()) weight[kUpdate] = 0;
    if (config.n_claim_defs ? schemas.empty() : open_schemas.empty()) {
      weight[kClaimDef] = 0;
    }
    std::uint64_t total = 0;
    for (auto w : weight) total += w;
    if (total == 0) break;
    std::uint64_t ticket = rng.below(total);
    int kind = 0;
    while (ticket >= weight[kind]) ticket -= weight[kind++];
    --remaining[kind];

    const SeqNo seq = docs.size() + 1;
    const std::int64_t time = next_time(seq);
    json doc;
    switch (kind) {
      case kOrg: {
        Did dest = random_did(rng);
        std::string alias = config.alias_vocab[orgs.size() % config.alias_vocab.size()];
        const Did& author = stewards[rng.below(stewards.size())];
        doc = envelope_json(seq, to_wire(TxnType::kNym), author,
                            nym_data(dest, alias, std::string("101"),
                                     "~" + random_base58(rng, 16)),
                            time, &rng);
        orgs.push_back(dest);
        org_alias.push_back(alias);
        registered.push_back(dest);
        if (stewards.size() < 4) stewards.push_back(dest);
        break;
      }
      case kPlain: {
        Did dest = random_did(rng);
        doc = envelope_json(seq, to_wire(TxnType::kNym), pick_org_or_fixture(),
                            nym_data(dest, std::nullopt, std::nullopt,
                                     "~" + random_base58(rng, 16)),
                            time, &rng);
        registered.push_back(dest);
        break;
      }
      case kUpdate: {
        std::size_t which = rng.below(orgs.size());
        const auto& vocab = config.alias_vocab;
        std::size_t pick = rng.below(vocab.size());
        if (vocab[pick] == org_alias[which]) pick = (pick + 1) % vocab.size();
        std::string alias = vocab[pick];
        org_alias[which] = alias;
        doc = envelope_json(seq, to_wire(TxnType::kNym), orgs[which],
                            nym_data(orgs[which], alias, std::string("101"),
                                     "~" + random_base58(rng, 16)),
                            time, &rng);
        break;
      }
      case kSchema: {
        const Did& author = pick_org_or_fixture();
        std::string name =
            config.schema_name_vocab[rng.below(config.schema_name_vocab.size())];
        int minor = versions_per_name[name]++;
        std::string version = "1." + std::to_string(minor);
        std::vector<std::string> pool = config.attr_vocab;
        std::size_t max_attrs = std::min<std::size_t>(6, pool.size());
        std::size_t n_attrs =
            max_attrs <= 2 ? max_attrs : 2 + rng.below(max_attrs - 1);
        std::vector<std::string> attrs;
        for (std::size_t i = 0; i < n_attrs; ++i) {
          std::size_t j = i + rng.below(pool.size() - i);
          std::swap(pool[i], pool[j]);
          attrs.push_back(pool[i]);
        }
        doc = envelope_json(seq, to_wire(TxnType::kSchema), author,
                            schema_data(name, version, attrs), time, &rng);
        doc["txnMetadata"]["txnId"] = author.str() + ":2:" + name + ":" + version;
        schemas.push_back({seq, attrs, name, version, config.claim_defs_per_schema});
        if (!config.n_claim_defs && config.claim_defs_per_schema > 0) {
          open_schemas.push_back(schemas.size() - 1);
        }
        break;
      }
      case kClaimDef: {
        std::size_t schema_index;
        if (config.n_claim_defs) {
          schema_index = rng.below(schemas.size());
        } else {
          std::size_t slot = rng.below(open_schemas.size());
          schema_index = open_schemas[slot];
          if (--schemas[schema_index].quota == 0) {
            open_schemas.erase(open_schemas.begin() + static_cast<long>(slot));
          }
        }
        const auto& schema = schemas[schema_index];
        const Did& author = pick_org_or_fixture();
        json r = json::object();
        for (const auto& attr : schema.attrs) r[attr] = random_base58(rng, 16);
        r["master_secret"] = random_base58(rng, 16);
        std::string tag = rng.below(3) == 0 ? "default" : "tag" + std::to_string(rng.below(9));
        json data = {{"ref", schema.seq},
                     {"signature_type", "CL"},
                     {"tag", tag},
                     {"data",
                      {{"primary",
                        {{"n", random_base58(rng, 24)},
                         {"s", random_base58(rng, 24)},
                         {"z", random_base58(rng, 24)},
                         {"rctxt", random_base58(rng, 24)},
                         {"r", r}}}}}};
        doc = envelope_json(seq, to_wire(TxnType::kClaimDef), author,
                            std::move(data), time, &rng);
        doc["txnMetadata"]["txnId"] = author.str() + ":3:CL:" +
                                      std::to_string(schema.seq) + ":" + tag;
        break;
      }
      case kAttrib: {
        const Did& dest = registered[rng.below(registered.size())];
        json endpoint = {{"endpoint",
                          {{"endpoint", "https://agent" + std::to_string(rng.below(1000)) +
                                            ".example.org:8443"}}}};
        doc = envelope_json(seq, to_wire(TxnType::kAttrib), dest,
                            {{"dest", dest.str()}, {"raw", endpoint.dump()}},
                            time, &rng);
        break;
      }
      default:
        break;
    }
    docs.push_back(doc.dump());
  }
  return SimLedger(std::move(docs));
}

SimLedger::SimLedger(std::vector<std::string> documents)
    : documents_(std::move(documents)) {
  for (const auto& doc : documents_) tree_.append(doc);
}

TxnEnvelope SimLedger::envelope(SeqNo seq) const {
  if (seq == 0 || seq > documents_.size()) {
    throw Error(Errc::kIndexOutOfRange, "seqNo " + std::to_string(seq));
  }
  return parse_txn(documents_[seq - 1]);
}

void SimLedger::validate() const {
  std::unordered_set<std::string> introduced;
  std::vector<TxnType> types;
  bool genesis = true;
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const SeqNo expected = i + 1;
    auto fail = [&](const std::string& what) {
      throw Error(Errc::kInvalidConfig,
                  "seqNo " + std::to_string(expected) + ": " + what);
    };
    std::optional<LedgerEntry> parsed;
    try {
      parsed = classify(parse_txn(documents_[i]));
    } catch (const Error& e) {
      fail(e.what());
    }
    const TxnEnvelope& env = parsed->envelope;
    const LedgerEntry& entry = *parsed;
    if (env.seq_no != expected) fail("seqNo not dense");
    if (env.txn_type != TxnType::kNym) genesis = false;
    if (const auto* nym = std::get_if<NymData>(&entry.payload)) {
      if (genesis) introduced.insert(nym->dest.str());
    }
    if (!introduced.contains(env.author_did.str())) {
      fail("author " + env.author_did.str() + " not introduced by an earlier NYM");
    }
    if (const auto* nym = std::get_if<NymData>(&entry.payload)) {
      introduced.insert(nym->dest.str());
    }
    if (const auto* cd = std::get_if<ClaimDefData>(&entry.payload)) {
      if (types[cd->schema_ref - 1] != TxnType::kSchema) {
        fail("CLAIM_DEF ref " + std::to_string(cd->schema_ref) + " is not a SCHEMA");
      }
    }
    types.push_back(env.txn_type);
  }
}

}  // namespace credsearch
