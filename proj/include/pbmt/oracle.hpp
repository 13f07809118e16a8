// oracle.hpp -- exhaustive reference decoder for short sentences
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pbmt/search.hpp"

namespace pbmt {

inline constexpr std::size_t kOracleMaxWords = 8;

struct OracleResult {
  bool ok = true;
  std::string error;
  std::string text;
  double score = 0;
  FeatureVector features{};
  std::uint64_t derivations = 0;  // complete derivations scored
  std::vector<SpanRange> spans;   // best derivation, application order
};

// Enumerates every legal derivation (no pruning, no recombination, no
// pools) and keeps the best. Shares the model types and feature primitives
// with the beam decoder but none of its search machinery, so agreement
// between the two is evidence, not construction. Sentences longer than
// kOracleMaxWords are refused.
OracleResult exhaustive_decode(const DecodeModels& models,
                               const std::vector<std::string>& tokens,
                               int distortion_limit);

}  // namespace pbmt
