#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "credsearch/enriched_doc.hpp"

namespace credsearch {

enum class Field : std::uint8_t {
  kSchemaName,
  kAttrNames,
  kAuthorAlias,
  kSchemaVersion,
  kRawText,
};

inline constexpr std::size_t kFieldCount = 5;
inline constexpr std::array<Field, kFieldCount> kAllFields = {
    Field::kSchemaName, Field::kAttrNames, Field::kAuthorAlias,
    Field::kSchemaVersion, Field::kRawText};

constexpr std::size_t field_index(Field f) { return static_cast<std::size_t>(f); }
std::string_view to_string(Field f);

struct FieldWeights {
  std::array<double, kFieldCount> boost = {3.0, 2.0, 3.0, 1.0, 0.5};

  double operator[](Field f) const { return boost[field_index(f)]; }
  // Throws Error(kInvalidQuery) unless every boost is > 0.
  void validate() const;
};

struct Token {
  std::string text;
  Field field = Field::kRawText;
  std::uint32_t position = 0;
};

// Lowercases ASCII letters and splits on every ASCII character that is not a
// letter or digit. Bytes >= 0x80 (UTF-8 sequences) stay inside tokens.
// Tokens shorter than two bytes are dropped.
std::vector<std::string> tokenize(std::string_view text);

using FieldTokens = std::array<std::vector<std::string>, kFieldCount>;

// Token streams for the five indexed fields. raw_text is the tokenization of
// the canonical document.
FieldTokens analyze(const EnrichedDoc& doc);
std::vector<Token> analyze_tokens(const EnrichedDoc& doc);

}  // namespace credsearch
