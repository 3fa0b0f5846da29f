#include "credsearch/analyzer.hpp"

#include "credsearch/errors.hpp"

namespace credsearch {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c >= 0x80;
}

void append_tokens(std::string_view text, std::vector<std::string>& out) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (i - start >= 2) {
      std::string token(text.substr(start, i - start));
      for (auto& c : token) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      out.push_back(std::move(token));
    }
  }
}

}  // namespace

std::string_view to_string(Field f) {
  switch (f) {
    case Field::kSchemaName: return "schema_name";
    case Field::kAttrNames: return "attr_names";
    case Field::kAuthorAlias: return "author_alias";
    case Field::kSchemaVersion: return "schema_version";
    case Field::kRawText: return "raw_text";
  }
  return "unknown";
}

void FieldWeights::validate() const {
  for (auto f : kAllFields) {
    if (!(boost[field_index(f)] > 0.0)) {
      throw Error(Errc::kInvalidQuery,
                  "boost for " + std::string(to_string(f)) + " must be > 0");
    }
  }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  append_tokens(text, out);
  return out;
}

FieldTokens analyze(const EnrichedDoc& doc) {
  FieldTokens fields;
  if (doc.schema_name) {
    append_tokens(*doc.schema_name, fields[field_index(Field::kSchemaName)]);
  }
  for (const auto& attr : doc.attr_names) {
    append_tokens(attr, fields[field_index(Field::kAttrNames)]);
  }
  if (doc.author_alias) {
    append_tokens(*doc.author_alias, fields[field_index(Field::kAuthorAlias)]);
  }
  if (doc.schema_version) {
    append_tokens(*doc.schema_version, fields[field_index(Field::kSchemaVersion)]);
  }
  append_tokens(doc.raw, fields[field_index(Field::kRawText)]);
  return fields;
}

std::vector<Token> analyze_tokens(const EnrichedDoc& doc) {
  std::vector<Token> tokens;
  auto fields = analyze(doc);
  for (auto f : kAllFields) {
    std::uint32_t position = 0;
    for (auto& text : fields[field_index(f)]) {
      tokens.push_back({std::move(text), f, position++});
    }
  }
  return tokens;
}

}  // namespace credsearch
