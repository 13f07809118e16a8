// tm_format.hpp -- on-disk layout constants shared by the table compiler and
// reader (internal header)
#pragma once

#include <cstdint>

namespace pbmt::tmfmt {

inline constexpr char kMagic[4] = {'S', 'W', 'P', 'T'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint64_t kFingerprintSeed = 0x9E3779B97F4A7C15ull;

// Slot flags.
inline constexpr std::uint32_t kSlotUsed = 1;
inline constexpr std::uint32_t kSlotSpill = 2;

inline constexpr const char* kIndexFile = "index.bin";
inline constexpr const char* kVocabFile = "vocab.bin";
inline constexpr const char* kPayloadFile = "payload.bin";
inline constexpr const char* kCacheFile = "cache.bin";
inline constexpr const char* kSpillFile = "spill.bin";

}  // namespace pbmt::tmfmt
