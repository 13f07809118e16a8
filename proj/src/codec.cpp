#include "pbmt/codec.hpp"

#include <zlib.h>

#include <algorithm>
#include <string>

namespace pbmt {
namespace {

constexpr std::size_t kMaxRawBytes = std::size_t{1} << 30;

Bytes deflate_bytes(std::span<const std::uint8_t> raw) {
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  Bytes out(bound);
  int rc = compress2(out.data(), &bound, raw.data(),
                     static_cast<uLong>(raw.size()), Z_DEFAULT_COMPRESSION);
  if (rc != Z_OK) fail("deflate failed: zlib error ", rc);
  out.resize(bound);
  return out;
}

Bytes inflate_bytes(std::span<const std::uint8_t> packed, std::size_t raw_size) {
  Bytes out(raw_size);
  uLongf len = static_cast<uLongf>(raw_size);
  uLong consumed = static_cast<uLong>(packed.size());
  int rc = uncompress2(out.data(), &len, packed.data(), &consumed);
  if (rc != Z_OK || len != raw_size || consumed != packed.size())
    fail("inflate failed: corrupt compressed record");
  return out;
}

void put_scores(Bytes& out, const TranslationRule& r) {
  for (float f : r.tm_scores) put_f32(out, f);
  for (float f : r.lexro_scores) put_f32(out, f);
}

void get_scores(ByteReader& in, TranslationRule& r) {
  for (float& f : r.tm_scores) f = in.get_f32();
  for (float& f : r.lexro_scores) f = in.get_f32();
}

}  // namespace

Codec codec_from_name(const std::string& name) {
  if (name == "identity") return Codec::kIdentity;
  if (name == "compressed") return Codec::kCompressed;
  fail("unknown codec '", name, "' (expected identity or compressed)");
}

const char* codec_name(Codec c) {
  return c == Codec::kIdentity ? "identity" : "compressed";
}

Bytes encode_targets(const TargetPhraseCollection& collection, Codec codec) {
  Bytes out;
  if (codec == Codec::kIdentity) {
    put_u32(out, static_cast<std::uint32_t>(collection.rules.size()));
    for (const auto& r : collection.rules) {
      put_u32(out, static_cast<std::uint32_t>(r.target.size()));
      for (WordId w : r.target) put_u32(out, w);
      put_scores(out, r);
    }
    return out;
  }

  Bytes raw;
  put_varint(raw, collection.rules.size());
  for (const auto& r : collection.rules) {
    put_varint(raw, r.target.size());
    for (WordId w : r.target) put_varint(raw, w);
    put_scores(raw, r);
  }
  Bytes packed = deflate_bytes(raw);
  put_u32(out, static_cast<std::uint32_t>(raw.size()));
  out.insert(out.end(), packed.begin(), packed.end());
  return out;
}

void decode_targets(std::span<const std::uint8_t> bytes, Codec codec,
                    TargetPhraseCollection& out) {
  out.rules.clear();
  if (codec == Codec::kIdentity) {
    ByteReader in(bytes);
    std::uint32_t count = in.get_u32();
    out.rules.reserve(std::min<std::size_t>(count, in.remaining() / 44 + 1));
    for (std::uint32_t i = 0; i < count; ++i) {
      TranslationRule r;
      std::uint32_t len = in.get_u32();
      if (len > in.remaining() / 4) fail("corrupt rule: target length ", len);
      r.target.resize(len);
      for (auto& w : r.target) w = in.get_u32();
      get_scores(in, r);
      out.rules.push_back(std::move(r));
    }
    if (!in.done()) fail("corrupt record: ", in.remaining(), " trailing bytes");
    return;
  }

  ByteReader head(bytes);
  std::uint32_t raw_size = head.get_u32();
  if (raw_size > kMaxRawBytes) fail("corrupt record: implausible size ", raw_size);
  Bytes raw = inflate_bytes(bytes.subspan(4), raw_size);
  ByteReader in(raw.data(), raw.size());
  std::uint64_t count = in.get_varint();
  out.rules.reserve(std::min<std::size_t>(count, in.remaining() / 41 + 1));
  for (std::uint64_t i = 0; i < count; ++i) {
    TranslationRule r;
    std::uint64_t len = in.get_varint();
    if (len > in.remaining()) fail("corrupt rule: target length ", len);
    r.target.resize(len);
    for (auto& w : r.target) {
      std::uint64_t v = in.get_varint();
      if (v > 0xFFFFFFFFull) fail("corrupt rule: word id ", v);
      w = static_cast<WordId>(v);
    }
    get_scores(in, r);
    out.rules.push_back(std::move(r));
  }
  if (!in.done()) fail("corrupt record: ", in.remaining(), " trailing bytes");
}

}  // namespace pbmt
