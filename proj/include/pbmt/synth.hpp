// synth.hpp -- seeded synthetic corpus and model generator
#pragma once

#include <cstdint>
#include <string>

namespace pbmt {

// Knobs for the generated language pair. Everything is driven by one seed;
// identical specs produce byte-identical files.
struct SyntheticSpec {
  std::uint64_t seed = 1;

  // Corpus shape: lengths are a rounded normal, clipped to [min_len, max_len].
  std::size_t sentences = 1000;
  double avg_len = 7.3;
  double len_stddev = 2.0;
  std::size_t min_len = 1;
  std::size_t max_len = 30;
  double oov_rate = 0.0;  // fraction of tokens drawn outside the vocabulary

  // Model shape.
  std::size_t source_vocab = 200;
  std::size_t target_vocab = 200;
  std::size_t bigram_sources = 100;  // two-word source phrases with rules
  std::size_t rules_per_source = 4;
  std::size_t max_target_len = 3;
  // When nonzero, targets come from this many tokens only, which makes the
  // rule payload highly repetitive (compression-friendly).
  std::size_t target_pool = 0;
  double lexro_fraction = 1.0;  // chance a rule gets a reordering row
  std::size_t lm_bigrams = 2000;
};

struct SyntheticFiles {
  std::string phrase_table;
  std::string lexro;
  std::string counts;
  std::string lm;
  std::string corpus;
  std::uint64_t corpus_words = 0;
};

SyntheticFiles generate_synthetic(const SyntheticSpec& spec,
                                  const std::string& out_dir);

}  // namespace pbmt
