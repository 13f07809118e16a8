// lexro.hpp -- standalone lexicalized reordering table (text format)
#pragma once

#include <array>
#include <string>
#include <unordered_map>

#include "pbmt/features.hpp"

namespace pbmt {

// Text table "src ||| tgt ||| p1 p2 p3 p4 p5 p6" keyed by surface phrase
// pair. The compiler embeds these same values into binary rules; this class
// is the alternative scoring path that reads them at decode time instead.
// Both paths quantize through log_prob_f32, so they agree bit for bit.
class LexroTable {
 public:
  static LexroTable load(const std::string& path);

  // Six log-probabilities, or the uniform fallback when the pair is absent.
  const std::array<float, kLexroScoreCount>& lookup(
      const std::string& source, const std::string& target) const;

  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::array<float, kLexroScoreCount>> entries_;
  std::array<float, kLexroScoreCount> fallback_ = uniform_lexro();
};

}  // namespace pbmt
