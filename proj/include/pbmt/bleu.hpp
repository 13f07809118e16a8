// bleu.hpp -- corpus-level BLEU-4
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pbmt {

struct BleuResult {
  double bleu = 0;
  std::array<double, 4> precisions{};
  double brevity_penalty = 1;
  std::uint64_t hyp_words = 0;
  std::uint64_t ref_words = 0;
};

// Geometric mean of clipped n-gram precisions (n = 1..4) times the brevity
// penalty, pooled over the corpus. No smoothing: any empty precision bucket
// zeroes the score. Mismatched corpus sizes or an empty corpus are errors.
BleuResult corpus_bleu(const std::vector<std::string>& hypotheses,
                       const std::vector<std::string>& references);

}  // namespace pbmt
