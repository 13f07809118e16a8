// bench.hpp -- measurement harnesses over the pipeline
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pbmt/driver.hpp"
#include "pbmt/tm.hpp"

namespace pbmt {

// Physical cores from sysfs topology (unique package/core pairs),
// hardware_concurrency as the fallback.
std::size_t physical_cores();

// Order-sensitive FNV over the lines, for cheap output-identity checks.
std::uint64_t hash_lines(const std::vector<std::string>& lines);

struct ScalingRow {
  std::size_t threads = 0;
  double seconds = 0;  // median over runs
  double words_per_second = 0;
  std::uint64_t output_hash = 0;
};

// Decodes the corpus at each thread count, median of `runs` after one
// warm-up pass. Model load happens once, outside all timings.
std::vector<ScalingRow> bench_scaling(const LoadedModels& models,
                                      const DecoderConfig& base,
                                      const std::vector<std::string>& input,
                                      const std::vector<std::size_t>& threads,
                                      std::size_t runs);

struct CacheRow {
  std::size_t cache_size = 0;
  std::size_t cache_entries = 0;  // what the manifest actually provided
  double hit_rate = 0;
  double seconds = 0;
  std::uint64_t output_hash = 0;
};

// Reopens the table at each cache size (reload excluded from timing) and
// decodes the corpus once per size.
std::vector<CacheRow> bench_cache(const DecoderConfig& base,
                                  const std::vector<std::string>& input,
                                  const std::vector<std::size_t>& sizes);

struct CodecReport {
  std::uint64_t identity_payload = 0;
  std::uint64_t compressed_payload = 0;
  double identity_ns_per_lookup = 0;    // median batch, cache disabled
  double compressed_ns_per_lookup = 0;
};

// Compiles the same text model under both codecs into work_dir and times
// uncached lookup+decode over the built source phrases, cycling through
// them until `lookups` probes have run (median of 5 batches).
CodecReport bench_codec(const BuildInputs& inputs, const BuildOptions& base,
                        const std::string& work_dir, std::size_t lookups);

struct CompareReport {
  std::size_t scores_compared = 0;
  std::size_t score_mismatches = 0;
  double max_abs_diff = 0;
  std::size_t text_lines_compared = 0;
  std::size_t text_mismatches = 0;
};

// Compares two run reports (sentence_score.<i> lines) within a tolerance,
// and optionally two translation files line by line.
CompareReport compare_runs(const std::string& report_a,
                           const std::string& report_b, double tolerance,
                           const std::string& text_a = "",
                           const std::string& text_b = "");

}  // namespace pbmt
