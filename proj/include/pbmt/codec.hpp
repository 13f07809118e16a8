// codec.hpp -- payload codecs for serialized rule collections
#pragma once

#include <cstdint>
#include <span>

#include "pbmt/binio.hpp"
#include "pbmt/rule.hpp"

namespace pbmt {

enum class Codec : std::uint32_t {
  // Flat little-endian records; decoding is a straight copy.
  kIdentity = 0,
  // Varint-packed ids deflated with zlib, score block stored raw inside the
  // compressed stream.
  kCompressed = 1,
};

Codec codec_from_name(const std::string& name);
const char* codec_name(Codec c);

// Serializes rules only; the source phrase is keyed externally.
Bytes encode_targets(const TargetPhraseCollection& collection, Codec codec);

// Inverse of encode_targets. `out.source` is left untouched. Corrupt input
// raises Error; decoding never reads out of bounds.
void decode_targets(std::span<const std::uint8_t> bytes, Codec codec,
                    TargetPhraseCollection& out);

}  // namespace pbmt
