#pragma once

#include <cstddef>
#include <string_view>

namespace credsearch {

// Optimal string alignment distance (Damerau-Levenshtein restricted to
// non-overlapping adjacent transpositions), computed over bytes with the full
// dynamic programming matrix.
std::size_t osa_distance(std::string_view a, std::string_view b);

// Same metric, but gives up as soon as the distance provably exceeds
// max_distance and then returns max_distance + 1.
std::size_t bounded_osa_distance(std::string_view a, std::string_view b,
                                 std::size_t max_distance);

}  // namespace credsearch
