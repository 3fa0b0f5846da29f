#include "credsearch/scoring.hpp"

#include "credsearch/errors.hpp"

namespace credsearch {

void Query::validate() const {
  if (limit < 1 || limit > kMaxLimit) {
    throw Error(Errc::kInvalidQuery, "limit must be within 1..1000");
  }
}

void merge_match(std::map<std::string, TermMatch, std::less<>>& matches,
                 TermMatch candidate) {
  auto it = matches.find(candidate.term);
  if (it == matches.end()) {
    std::string key = candidate.term;
    matches.emplace(std::move(key), std::move(candidate));
  } else if (candidate.scale > it->second.scale) {
    it->second = std::move(candidate);
  }
}

}  // namespace credsearch
