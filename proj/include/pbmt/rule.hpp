// rule.hpp -- translation rules and per-source-phrase collections
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pbmt/common.hpp"

namespace pbmt {

// Word id that never names a real vocabulary entry. A pass-through rule uses
// it as its single target token; the decoder substitutes the source surface
// form when assembling output.
inline constexpr WordId kInvalidWordId = 0xFFFFFFFFu;

// Index layout of TranslationRule::tm_scores.
enum TmComponent : std::size_t {
  kTmTgtGivenSrc = 0,
  kTmSrcGivenTgt = 1,
  kTmLexTgtGivenSrc = 2,
  kTmLexSrcGivenTgt = 3,
};

inline constexpr std::size_t kTmScoreCount = 4;

// Reordering distributions: [direction * 3 + orientation] with direction 0 =
// Previous, 1 = Next and orientation 0 = monotone, 1 = swap, 2 =
// discontinuous.
inline constexpr std::size_t kLexroScoreCount = 6;

// One target option for a source phrase. Scores are natural-log
// probabilities quantized to f32, exactly as the binary table stores them.
struct TranslationRule {
  std::vector<WordId> target;
  std::array<float, kTmScoreCount> tm_scores{};
  std::array<float, kLexroScoreCount> lexro_scores{};
  bool passthrough = false;

  bool operator==(const TranslationRule&) const = default;
};

// All rules for one source phrase, sorted descending by p(target|source)
// and truncated to the build-time table limit.
struct TargetPhraseCollection {
  std::vector<WordId> source;
  std::vector<TranslationRule> rules;

  bool operator==(const TargetPhraseCollection&) const = default;
};

}  // namespace pbmt
