// lm.hpp -- back-off n-gram language model over the ARPA text format
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pbmt/common.hpp"

namespace pbmt {

using LmWordId = std::uint32_t;

inline constexpr std::size_t kMaxLmOrder = 8;

// Scoring context carried by a hypothesis, most recent word last. Two states
// that compare equal score every continuation identically, so they are safe
// recombination keys.
struct LMState {
  std::array<LmWordId, kMaxLmOrder - 1> words{};
  std::uint8_t length = 0;

  bool operator==(const LMState& o) const {
    if (length != o.length) return false;
    for (std::uint8_t i = 0; i < length; ++i)
      if (words[i] != o.words[i]) return false;
    return true;
  }
};

struct LMStateHash {
  std::size_t operator()(const LMState& s) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::uint8_t i = 0; i < s.length; ++i) {
      h ^= s.words[i];
      h *= 0x100000001b3ull;
    }
    h ^= s.length;
    h *= 0x100000001b3ull;
    return static_cast<std::size_t>(h);
  }
};

// Eagerly loaded n-gram model. Probabilities and back-off weights are log10
// values kept as doubles exactly as parsed; scoring is pure double
// arithmetic over them.
class NGramModel {
 public:
  static NGramModel load_arpa(const std::string& path);
  static NGramModel parse_arpa(std::istream& in, const std::string& name);

  std::size_t order() const { return order_; }
  std::size_t ngram_count(std::size_t n) const { return counts_[n]; }
  std::size_t vocab_size() const { return words_.size(); }
  bool synthesized_unk() const { return synthesized_unk_; }

  LmWordId begin_id() const { return kBegin; }
  LmWordId end_id() const { return kEnd; }
  LmWordId unk_id() const { return kUnk; }

  // Maps unseen tokens to <unk>.
  LmWordId word_id(std::string_view token) const;
  std::optional<LmWordId> find_word(std::string_view token) const;
  const std::string& word(LmWordId id) const { return words_[id]; }

  // Context [<s>] for the start of a sentence.
  LMState begin_state() const;
  // Empty context, used for context-free phrase estimates.
  LMState null_state() const { return LMState{}; }

  // log10 p(word | state) plus the successor state, already truncated to the
  // shortest equivalent context.
  std::pair<double, LMState> score_word(const LMState& state,
                                        LmWordId word) const;

  // Folds score_word over the phrase. Empty phrase scores 0 and keeps the
  // state unchanged.
  std::pair<double, LMState> score_phrase(const LMState& state,
                                          std::span<const LmWordId> words) const;

 private:
  static constexpr LmWordId kBegin = 0;
  static constexpr LmWordId kEnd = 1;
  static constexpr LmWordId kUnk = 2;

  struct Key {
    std::array<LmWordId, kMaxLmOrder> w{};
    std::uint8_t len = 0;

    bool operator==(const Key& o) const {
      if (len != o.len) return false;
      for (std::uint8_t i = 0; i < len; ++i)
        if (w[i] != o.w[i]) return false;
      return true;
    }
  };

  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = 0xcbf29ce484222325ull;
      for (std::uint8_t i = 0; i < k.len; ++i) {
        h ^= k.w[i];
        h *= 0x100000001b3ull;
      }
      h ^= k.len;
      h *= 0x100000001b3ull;
      return static_cast<std::size_t>(h);
    }
  };

  struct Entry {
    double prob = 0;
    double backoff = 0;
  };

  LmWordId intern(std::string_view token);
  const Entry* find(const LmWordId* words, std::size_t len) const;

  std::size_t order_ = 0;
  std::array<std::size_t, kMaxLmOrder + 1> counts_{};
  std::unordered_map<std::string, LmWordId> vocab_;
  std::vector<std::string> words_;
  std::unordered_map<Key, Entry, KeyHash> entries_;
  // Contexts that begin at least one stored longer n-gram; a state suffix
  // outside this set with zero back-off cannot influence any future score.
  std::unordered_set<Key, KeyHash> has_continuation_;
  bool synthesized_unk_ = false;
};

}  // namespace pbmt
