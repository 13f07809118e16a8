// search.hpp -- stack decoding with cube pruning
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "pbmt/arena.hpp"
#include "pbmt/coverage.hpp"
#include "pbmt/features.hpp"
#include "pbmt/lexro.hpp"
#include "pbmt/lm.hpp"
#include "pbmt/tm.hpp"

namespace pbmt {

// How hypotheses are grouped into stacks. Grouping never changes which
// derivations are legal, only how the beam competes.
enum class StackConfiguration {
  kCardinality,     // one stack per number of covered words
  kCoverage,        // one stack per coverage bitset
  kCoverageEndPos,  // coverage plus the end of the last translated span
};

StackConfiguration stack_config_from_name(const std::string& name);
const char* stack_config_name(StackConfiguration config);

struct SearchParams {
  static constexpr std::size_t kUnlimitedPops =
      std::numeric_limits<std::size_t>::max();

  std::size_t pop_limit = 400;  // cube pops per stack
  int distortion_limit = 6;     // negative = unlimited reordering
  std::size_t beam_size = 0;    // extra per-stack cap; 0 = pop limit only
  StackConfiguration stack = StackConfiguration::kCoverageEndPos;
  std::size_t max_sentence_length = 200;
};

// Shared read-only models. tm_to_lm (optional, built once via
// build_lm_word_map) maps table vocabulary ids to LM ids; without it the
// mapping falls back to per-token string lookups.
struct DecodeModels {
  const RuleTable* table = nullptr;
  const NGramModel* lm = nullptr;
  const WeightVector* weights = nullptr;
  const LexroTable* separate_lexro = nullptr;  // scores read here when set
  const std::vector<LmWordId>* tm_to_lm = nullptr;
};

std::vector<LmWordId> build_lm_word_map(const RuleTable& table,
                                        const NGramModel& lm);

// A rule with decode-time plumbing resolved: LM-space target, surface
// strings, score arrays, and the context-free estimate that orders cubes and
// feeds the future-cost table.
struct PreparedRule {
  std::vector<LmWordId> lm_target;
  std::vector<const std::string*> out_tokens;
  std::array<float, kTmScoreCount> tm{};
  std::array<float, kLexroScoreCount> lexro{};
  bool passthrough = false;
  std::uint32_t word_count = 0;
  double static_score = 0;
};

struct SpanOptions {
  SpanRange span;
  std::vector<PreparedRule> rules;  // sorted by static_score, best first
};

struct SentenceOptions {
  std::size_t length = 0;
  std::vector<SpanOptions> spans;  // only spans with at least one rule
};

// Admissible rest-cost estimates from the standard span DP: each cell is the
// best single rule or any two-part split, so longer spans never estimate
// below their parts.
struct FutureTable {
  std::size_t n = 0;
  std::vector<double> best;  // (n+1)*(n+1), valid for start < end

  double at(std::size_t start, std::size_t end) const {
    return best[start * (n + 1) + end];
  }
  // Sum over maximal uncovered runs.
  double gaps(const CoverageVector& coverage, std::uint32_t n_words) const;
};

FutureTable estimate_future(const SentenceOptions& options);

// Search node. Trivially destructible so arena reset needs no destructor
// walk; slots are recycled through a RecyclingQueue.
struct Hypothesis {
  const Hypothesis* parent = nullptr;
  const PreparedRule* rule = nullptr;  // null only for the initial hypothesis
  SpanRange span;                      // last translated span
  CoverageVector coverage;
  std::int32_t end_pos = -1;  // index of the last covered word, -1 at start
  std::uint32_t seq = 0;      // creation order, the deterministic tiebreak
  LMState lm_state;
  FeatureVector accumulated{};
  double score = 0;   // dot(weights, accumulated), always
  double future = 0;  // rest-cost estimate over uncovered gaps
  double total = 0;   // score + future
};
static_assert(std::is_trivially_destructible_v<Hypothesis>);

// Stack identity of a hypothesis under a configuration. Keys order stacks
// for processing: cardinality first, so stacks only ever feed later ones.
struct StackKey {
  std::int32_t cardinality = 0;
  std::array<std::uint64_t, CoverageVector::kWords> bits{};
  std::int32_t end_pos = 0;

  auto operator<=>(const StackKey&) const = default;
};

StackKey stack_key(StackConfiguration config, const Hypothesis& hyp);

// Distortion feasibility: the jump into `next` obeys the limit, and after
// covering it the walk back to the leftmost uncovered word stays within the
// limit. The second half is the usual conservative guard; it can reject
// derivations a more patient search would finish, so exhaustive reference
// decoding applies the same rule.
bool distortion_check(const CoverageVector& coverage, std::int32_t end_pos,
                      SpanRange next, int limit, std::uint32_t n_words);

struct SentenceStats {
  std::uint64_t pops = 0;
  std::uint64_t created = 0;
  std::uint64_t recombined = 0;
  std::uint64_t pruned = 0;  // beam evictions
  std::uint64_t stacks = 0;
  std::uint64_t max_stack = 0;
  std::uint64_t oov = 0;
  bool partial = false;  // no complete derivation; best fragment emitted
};

struct SearchTimers {
  std::uint64_t table_ns = 0;
  std::uint64_t lm_ns = 0;
  std::uint64_t lexro_ns = 0;
  std::uint64_t memory_ns = 0;

  SearchTimers& operator+=(const SearchTimers& o) {
    table_ns += o.table_ns;
    lm_ns += o.lm_ns;
    lexro_ns += o.lexro_ns;
    memory_ns += o.memory_ns;
    return *this;
  }
};

// Per-worker reusable state. Hypotheses live in the ephemeral pool and are
// recycled through the queue; reset_sentence() drops them wholesale while
// keeping pool capacity for the next sentence.
class SearchContext {
 public:
  SearchContext()
      : queue_(sizeof(Hypothesis), alignof(Hypothesis)) {}

  Pool& persistent() { return pools_.persistent; }
  Pool& ephemeral() { return pools_.ephemeral; }
  RecyclingQueue& hypothesis_queue() { return queue_; }

  void reset_sentence() {
    max_sentence_bytes = std::max(max_sentence_bytes, pools_.ephemeral.used());
    queue_.clear();
    pools_.ephemeral.reset();
    ++sentences;
  }

  PoolStats ephemeral_stats() const { return pools_.ephemeral.stats(); }
  PoolStats persistent_stats() const { return pools_.persistent.stats(); }

  SearchTimers timers;
  RuleTableStats table_stats;
  std::uint64_t sentences = 0;
  std::size_t max_sentence_bytes = 0;

 private:
  PoolPair pools_;
  RecyclingQueue queue_;
};

struct DecodeResult {
  bool ok = true;
  std::string error;
  std::string text;
  double score = 0;
  FeatureVector features{};
  SentenceStats stats;
};

// Rule collection and preparation for one sentence: table lookups over all
// spans (bounded by the table's widest phrase), pass-through synthesis for
// single tokens nothing covers, LM/surface resolution and the static
// estimate. Spans come back ordered by (start, end).
SentenceOptions collect_options(const DecodeModels& models,
                                const std::vector<std::string>& tokens,
                                SearchContext& ctx, SentenceStats& stats);

// Beam decode of one tokenized sentence. Model-level misconfiguration
// throws; per-sentence problems come back with ok == false. The sentence
// must outlive the call (output references its tokens), the context must
// be reset between sentences by the caller.
DecodeResult decode(const DecodeModels& models,
                    const std::vector<std::string>& tokens,
                    const SearchParams& params, SearchContext& ctx);

}  // namespace pbmt
