// coverage.hpp -- source-position bitsets and spans
#pragma once

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>

namespace pbmt {

// Half-open range of source positions.
struct SpanRange {
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  std::uint32_t length() const { return end - start; }
  auto operator<=>(const SpanRange&) const = default;
};

// Sentinel "span" before the first word; makes the first real phrase
// monotone when it starts at position 0.
inline constexpr SpanRange kInitialSpan{0, 0};

// Bitset over source positions with a cached cardinality. Capacity is fixed
// at kMaxPositions; the decoder enforces its sentence-length limit first.
class CoverageVector {
 public:
  static constexpr std::size_t kWords = 4;
  static constexpr std::size_t kMaxPositions = kWords * 64;

  bool test(std::uint32_t pos) const {
    return (words_[pos >> 6] >> (pos & 63)) & 1u;
  }

  void set_range(SpanRange span) {
    for (std::uint32_t p = span.start; p < span.end; ++p)
      words_[p >> 6] |= std::uint64_t{1} << (p & 63);
    count_ += static_cast<std::int32_t>(span.length());
  }

  bool overlaps(SpanRange span) const {
    for (std::uint32_t p = span.start; p < span.end; ++p)
      if (test(p)) return true;
    return false;
  }

  // First uncovered position in [0, limit), or limit if none.
  std::uint32_t leftmost_clear(std::uint32_t limit) const {
    for (std::uint32_t p = 0; p < limit; ++p)
      if (!test(p)) return p;
    return limit;
  }

  std::int32_t count() const { return count_; }
  const std::array<std::uint64_t, kWords>& words() const { return words_; }

  bool operator==(const CoverageVector& o) const { return words_ == o.words_; }
  auto operator<=>(const CoverageVector& o) const { return words_ <=> o.words_; }

 private:
  std::array<std::uint64_t, kWords> words_{};
  std::int32_t count_ = 0;
};

struct CoverageHash {
  std::size_t operator()(const CoverageVector& c) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::uint64_t w : c.words()) {
      h ^= w;
      h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace pbmt
