#include <random>

#include "doctest.h"
#include "pbmt/codec.hpp"
#include "pbmt/common.hpp"

using namespace pbmt;

namespace {

TargetPhraseCollection random_collection(std::mt19937_64& rng,
                                         std::size_t max_rules) {
  TargetPhraseCollection tpc;
  tpc.source = {WordId(rng() % 500)};
  std::size_t n = rng() % (max_rules + 1);
  for (std::size_t i = 0; i < n; ++i) {
    TranslationRule rule;
    std::size_t len = 1 + rng() % 5;
    for (std::size_t j = 0; j < len; ++j) rule.target.push_back(WordId(rng() % 1000));
    for (auto& s : rule.tm_scores)
      s = -float(rng() % 1000) / 64.0f;
    for (auto& s : rule.lexro_scores)
      s = -float(rng() % 1000) / 64.0f;
    tpc.rules.push_back(std::move(rule));
  }
  return tpc;
}

}  // namespace

TEST_CASE("codec names round-trip") {
  CHECK(codec_from_name("identity") == Codec::kIdentity);
  CHECK(codec_from_name("compressed") == Codec::kCompressed);
  CHECK(std::string(codec_name(Codec::kIdentity)) == "identity");
  CHECK(std::string(codec_name(Codec::kCompressed)) == "compressed");
  CHECK_THROWS_AS(codec_from_name("gzip"), Error);
}

TEST_CASE("1000 random collections round-trip under both codecs") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 1000; ++i) {
    TargetPhraseCollection original = random_collection(rng, 8);
    for (Codec codec : {Codec::kIdentity, Codec::kCompressed}) {
      Bytes encoded = encode_targets(original, codec);
      TargetPhraseCollection decoded;
      decoded.source = original.source;  // the payload stores only targets
      decode_targets(encoded, codec, decoded);
      CHECK(decoded == original);
    }
  }
}

TEST_CASE("empty collection still round-trips") {
  TargetPhraseCollection empty;
  for (Codec codec : {Codec::kIdentity, Codec::kCompressed}) {
    Bytes encoded = encode_targets(empty, codec);
    TargetPhraseCollection decoded;
    decode_targets(encoded, codec, decoded);
    CHECK(decoded.rules.empty());
  }
}

TEST_CASE("repetitive rules compress below the identity size") {
  TargetPhraseCollection tpc;
  for (int i = 0; i < 100; ++i) {
    TranslationRule rule;
    rule.target = {1, 2, 3};
    for (auto& s : rule.tm_scores) s = -1.0f;
    for (auto& s : rule.lexro_scores) s = -1.0f;
    tpc.rules.push_back(std::move(rule));
  }
  Bytes identity = encode_targets(tpc, Codec::kIdentity);
  Bytes compressed = encode_targets(tpc, Codec::kCompressed);
  CHECK(compressed.size() < identity.size());
}

TEST_CASE("decode rejects corrupted payloads") {
  std::mt19937_64 rng(32);
  TargetPhraseCollection original = random_collection(rng, 6);
  for (Codec codec : {Codec::kIdentity, Codec::kCompressed}) {
    Bytes good = encode_targets(original, codec);
    TargetPhraseCollection scratch;

    Bytes truncated(good.begin(), good.end() - 3);
    CHECK_THROWS_AS(decode_targets(truncated, codec, scratch), Error);

    Bytes padded = good;
    padded.push_back(0);
    CHECK_THROWS_AS(decode_targets(padded, codec, scratch), Error);
  }

  // Compressed data that is not valid zlib.
  Bytes junk;
  put_u32(junk, 64);
  for (int i = 0; i < 32; ++i) junk.push_back(0x5A);
  TargetPhraseCollection scratch;
  CHECK_THROWS_AS(decode_targets(junk, Codec::kCompressed, scratch), Error);
}

TEST_CASE("decode is the inverse on a fuzz battery of sizes") {
  std::mt19937_64 rng(33);
  for (std::size_t rules : {0u, 1u, 2u, 17u, 100u}) {
    TargetPhraseCollection tpc;
    for (std::size_t i = 0; i < rules; ++i) {
      TranslationRule rule;
      std::size_t len = 1 + rng() % 7;
      for (std::size_t j = 0; j < len; ++j)
        rule.target.push_back(WordId(rng()));
      for (auto& s : rule.tm_scores) s = float(rng()) / float(rng() | 1);
      for (auto& s : rule.lexro_scores) s = -float(rng() % 100);
      tpc.rules.push_back(std::move(rule));
    }
    for (Codec codec : {Codec::kIdentity, Codec::kCompressed}) {
      Bytes encoded = encode_targets(tpc, codec);
      TargetPhraseCollection decoded;
      decode_targets(encoded, codec, decoded);
      CHECK(decoded.rules == tpc.rules);
    }
  }
}
