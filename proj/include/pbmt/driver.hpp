// driver.hpp -- corpus pipeline: configuration, worker threads, reporting
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pbmt/search.hpp"

namespace pbmt {

struct DecoderConfig {
  std::string table_dir;
  std::string lm_path;
  std::string weights_path;
  std::string separate_lexro_path;         // switches reordering to the text table
  std::optional<std::size_t> cache_size;   // overrides the built cache manifest
  std::size_t threads = 1;
  SearchParams search;

  // "key = value" lines, '#' comments. Unknown keys are errors. Callers
  // layer command-line overrides on top afterwards.
  static DecoderConfig from_file(const std::string& path);
  void apply_kv(const std::string& key, const std::string& value,
                const std::string& where);
  void validate() const;
};

// Models loaded once and shared read-only by all workers.
struct LoadedModels {
  RuleTable table;
  NGramModel lm;
  WeightVector weights;
  std::optional<LexroTable> separate_lexro;
  std::vector<LmWordId> tm_to_lm;
  double load_seconds = 0;

  static LoadedModels load(const DecoderConfig& config);
  DecodeModels view() const;
};

// Share of the decoding budget (threads x wall time) per phase, in percent.
struct PhasePercent {
  double memory = 0;
  double lm = 0;
  double phrase_table = 0;
  double lexro = 0;
  double search = 0;
  double misc = 0;
};

struct RunReport {
  std::size_t sentences = 0;
  std::size_t source_words = 0;
  std::size_t errors = 0;
  std::size_t partials = 0;
  std::uint64_t oov_tokens = 0;
  std::size_t threads = 1;
  double load_seconds = 0;    // excluded from throughput
  double decode_seconds = 0;  // threaded region wall time
  double words_per_second = 0;
  PhasePercent phases;
  RuleTableStats table_stats;
  double cache_hit_rate = 0;
  std::uint64_t pops = 0;
  std::uint64_t hypotheses_created = 0;
  std::uint64_t recombined = 0;
  std::uint64_t pool_resets = 0;
  std::uint64_t pool_capacity_bytes = 0;      // summed over workers
  std::uint64_t pool_max_sentence_bytes = 0;  // largest single-sentence usage
  std::uint64_t sync_ops = 0;  // shared-state synchronization events
  std::vector<double> sentence_scores;
  std::vector<std::pair<std::size_t, std::string>> sentence_errors;

  // "key<TAB>value" lines; per-sentence scores and errors included when
  // `with_scores` is set.
  std::string to_text(bool with_scores) const;
};

// Decodes input lines (one pre-tokenized sentence per line) into output,
// preserving order. Workers claim sentences from one shared cursor and
// write into pre-sized slots, so the only cross-thread traffic is that
// cursor. Failed sentences emit an empty line and an entry in
// sentence_errors.
RunReport run_corpus(const LoadedModels& models, const DecoderConfig& config,
                     const std::vector<std::string>& input,
                     std::vector<std::string>& output);

// Load models, decode `in` to `out` line by line, return the full report.
RunReport run_pipeline(const DecoderConfig& config, std::istream& in,
                       std::ostream& out);

}  // namespace pbmt
