// features.hpp -- feature functions of the log-linear model
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "pbmt/coverage.hpp"
#include "pbmt/rule.hpp"

namespace pbmt {

// Fixed component order. TM and lexicalized-reordering blocks occupy
// consecutive slots.
enum FeatureIndex : std::size_t {
  kFeatDistortion = 0,
  kFeatPhrasePenalty = 1,
  kFeatWordPenalty = 2,
  kFeatUnknownPenalty = 3,
  kFeatLm = 4,
  kFeatTmBase = 5,     // 4 components
  kFeatLexroBase = 9,  // 6 components
};

inline constexpr std::size_t kFeatureCount = 15;

using FeatureVector = std::array<double, kFeatureCount>;

// Per-component scaling factors of the log-linear model.
struct WeightVector {
  std::array<double, kFeatureCount> values{};

  double operator[](std::size_t i) const { return values[i]; }

  // Text format: one "Name= v v ..." line per feature group. Group names and
  // arities are fixed; anything else is a configuration error.
  static WeightVector load(const std::string& path);
  static WeightVector parse(std::istream& in, const std::string& name);
};

// Dot product in fixed index order.
double total_score(const FeatureVector& features, const WeightVector& weights);

enum class Orientation : std::uint8_t {
  kMonotone = 0,
  kSwap = 1,
  kDiscontinuous = 2,
};

enum class LexroDirection : std::uint8_t { kPrevious = 0, kNext = 1 };

// Negative absolute jump distance; 0 for a monotone continuation.
double distortion_penalty(std::int32_t prev_end, std::int32_t next_start);

// Orientation of `cur` relative to the previously translated span. Total:
// every span pair classifies as exactly one of the three cases.
Orientation classify_orientation(SpanRange prev, SpanRange cur);

float lexro_score(const TranslationRule& rule, LexroDirection dir,
                  Orientation orient);

struct Penalties {
  double phrase = 0;
  double word = 0;
  double unknown = 0;
};

Penalties penalties(const TranslationRule& rule);

// Shared quantizer: every model probability stored or compared as a float
// goes through this exact function so alternative storage paths stay
// bit-identical.
float log_prob_f32(double prob);

// Probability floor substituted for zero/absent translation scores.
inline constexpr double kTmFloorProb = 1e-9;

// Uniform reordering fallback: log(1/3) in every cell.
std::array<float, kLexroScoreCount> uniform_lexro();

// Synthesized copy-through rule for an out-of-vocabulary token. Target is
// the kInvalidWordId placeholder (one word long for the word penalty).
TranslationRule make_passthrough_rule();

}  // namespace pbmt
