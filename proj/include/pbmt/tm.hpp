// tm.hpp -- binary phrase table: compiler and load-on-demand reader
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pbmt/binio.hpp"
#include "pbmt/codec.hpp"
#include "pbmt/rule.hpp"

namespace pbmt {

struct BuildOptions {
  std::size_t table_limit = 100;   // rules kept per source phrase
  Codec codec = Codec::kIdentity;
  std::size_t cache_size = 0;      // manifest entries for the static cache
  double hash_load_factor = 0.5;
};

struct BuildInputs {
  std::string phrase_table;  // "src ||| tgt ||| p1 p2 p3 p4"
  std::string lexro;         // "src ||| tgt ||| 6 probs"; "" = none
  std::string counts;        // "src ||| count"; "" = none
};

struct BuildReport {
  std::size_t rules_read = 0;
  std::size_t rules_kept = 0;
  std::size_t rules_pruned = 0;
  std::size_t source_phrases = 0;
  std::size_t max_source_len = 0;
  std::size_t lexro_entries = 0;
  std::size_t lexro_missing = 0;  // rules that fell back to the uniform prior
  std::size_t cache_entries = 0;
  bool counts_missing = false;    // cache ranked by translation mass instead
  std::size_t fingerprint_collisions = 0;
  std::size_t spill_entries = 0;
  double max_quantization_error = 0.0;  // |ln p - f32(ln p)| over all scores
  std::uint64_t payload_bytes = 0;
  std::uint64_t index_slots = 0;

  std::string to_text() const;  // "key<TAB>value" lines
};

// Compiles the text model into out_dir (created if needed). Deterministic:
// identical inputs and options yield byte-identical files.
BuildReport build_rule_table(const BuildInputs& inputs, const BuildOptions& options,
                             const std::string& out_dir);

struct RuleTableStats {
  std::uint64_t lookups = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t payload_decodes = 0;
  std::uint64_t misses = 0;

  RuleTableStats& operator+=(const RuleTableStats& o) {
    lookups += o.lookups;
    cache_hits += o.cache_hits;
    payload_decodes += o.payload_decodes;
    misses += o.misses;
    return *this;
  }
};

struct OpenOptions {
  // Caps (or disables, with 0) the static cache; capped at what the manifest
  // holds. Empty = use the manifest as built.
  std::optional<std::size_t> cache_size;
};

// Reader over a compiled table directory. The payload stays memory-mapped;
// rules decode on lookup unless the static cache already holds them. Safe
// for concurrent lookups: all mutable state lives in caller-owned scratch
// and stats.
class RuleTable {
 public:
  static RuleTable open(const std::string& dir, const OpenOptions& options = {});

  // Cached sources return a pointer into the cache; uncached sources decode
  // into `scratch` and return its address. Absent sources return nullptr.
  const TargetPhraseCollection* lookup(std::span<const WordId> source,
                                       TargetPhraseCollection& scratch,
                                       RuleTableStats& stats) const;

  std::optional<WordId> find_token(std::string_view token) const;
  const std::string& token(WordId id) const { return tokens_[id]; }
  std::size_t vocab_size() const { return tokens_.size(); }

  Codec codec() const { return codec_; }
  std::size_t table_limit() const { return table_limit_; }
  std::size_t max_source_len() const { return max_source_len_; }
  std::size_t source_phrase_count() const { return source_phrases_; }
  std::size_t cache_entry_count() const { return cache_.size(); }
  std::size_t spill_entry_count() const { return spill_.size(); }

 private:
  struct Slot {
    std::uint64_t fp = 0;
    std::uint64_t offset = 0;
    std::uint32_t len = 0;
    std::uint32_t flags = 0;
  };

  struct SpillEntry {
    std::vector<WordId> key;
    std::uint64_t offset = 0;
    std::uint32_t len = 0;
  };

  // Transparent hashing so spans can query the cache without materializing a
  // key vector on the hot path.
  struct KeyHash {
    using is_transparent = void;
    std::size_t operator()(std::span<const WordId> v) const;
    std::size_t operator()(const std::vector<WordId>& v) const {
      return operator()(std::span<const WordId>(v));
    }
  };
  struct KeyEq {
    using is_transparent = void;
    bool operator()(std::span<const WordId> a, std::span<const WordId> b) const {
      return std::equal(a.begin(), a.end(), b.begin(), b.end());
    }
  };

  const Slot* probe(std::span<const WordId> source) const;
  void decode_at(std::uint64_t offset, std::uint32_t len,
                 TargetPhraseCollection& out) const;

  Codec codec_ = Codec::kIdentity;
  std::size_t table_limit_ = 0;
  std::size_t max_source_len_ = 0;
  std::size_t source_phrases_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<Slot> slots_;
  std::uint64_t slot_mask_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, WordId> vocab_;
  std::vector<SpillEntry> spill_;
  std::unordered_map<std::vector<WordId>, TargetPhraseCollection, KeyHash, KeyEq>
      cache_;
  MappedFile payload_;
};

}  // namespace pbmt
