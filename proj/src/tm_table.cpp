#include <cstring>
#include <filesystem>

#include "pbmt/tm.hpp"
#include "tm_format.hpp"

namespace pbmt {
namespace {

// Strips and verifies the trailing FNV-1a checksum.
Bytes read_checked(const std::string& path) {
  Bytes bytes = read_file(path);
  if (bytes.size() < 8) fail(path, ": file too small to hold a checksum");
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i)
    stored |= std::uint64_t{bytes[bytes.size() - 8 + i]} << (8 * i);
  if (stored != fnv1a({bytes.data(), bytes.size() - 8}))
    fail(path, ": checksum mismatch, file is corrupt");
  bytes.resize(bytes.size() - 8);
  return bytes;
}

}  // namespace

std::size_t RuleTable::KeyHash::operator()(std::span<const WordId> v) const {
  return murmur64(v.data(), v.size() * sizeof(WordId), 0x51ed270b);
}

RuleTable RuleTable::open(const std::string& dir, const OpenOptions& options) {
  namespace fs = std::filesystem;
  auto path = [&](const char* f) { return (fs::path(dir) / f).string(); };

  RuleTable t;
  {
    Bytes index = read_checked(path(tmfmt::kIndexFile));
    ByteReader in(index.data(), index.size());
    char magic[4];
    in.get_bytes(magic, 4);
    if (std::memcmp(magic, tmfmt::kMagic, 4) != 0)
      fail(path(tmfmt::kIndexFile), ": not a compiled rule table (bad magic)");
    std::uint32_t version = in.get_u32();
    if (version != tmfmt::kVersion)
      fail(path(tmfmt::kIndexFile), ": unsupported format version ", version);
    std::uint32_t codec_raw = in.get_u32();
    if (codec_raw > 1)
      fail(path(tmfmt::kIndexFile), ": unknown codec id ", codec_raw);
    t.codec_ = static_cast<Codec>(codec_raw);
    t.table_limit_ = in.get_u32();
    t.max_source_len_ = in.get_u32();
    t.seed_ = in.get_u64();
    std::uint64_t slot_count = in.get_u64();
    if (slot_count == 0 || (slot_count & (slot_count - 1)) != 0)
      fail(path(tmfmt::kIndexFile), ": slot count ", slot_count,
           " is not a power of two");
    t.source_phrases_ = in.get_u64();
    std::uint64_t payload_bytes = in.get_u64();
    std::uint32_t tm_arity = in.get_u32();
    std::uint32_t lexro_arity = in.get_u32();
    if (tm_arity != kTmScoreCount || lexro_arity != kLexroScoreCount)
      fail(path(tmfmt::kIndexFile), ": score arity ", tm_arity, "/", lexro_arity,
           " does not match this build (", kTmScoreCount, "/", kLexroScoreCount,
           ")");
    t.slots_.resize(slot_count);
    for (auto& s : t.slots_) {
      s.fp = in.get_u64();
      s.offset = in.get_u64();
      s.len = in.get_u32();
      s.flags = in.get_u32();
    }
    if (!in.done())
      fail(path(tmfmt::kIndexFile), ": trailing bytes after slot array");
    t.slot_mask_ = slot_count - 1;

    t.payload_ = MappedFile::open(path(tmfmt::kPayloadFile));
    if (t.payload_.size() != payload_bytes)
      fail(path(tmfmt::kPayloadFile), ": size ", t.payload_.size(),
           " does not match the index header (", payload_bytes, ")");
  }

  {
    Bytes vocab = read_checked(path(tmfmt::kVocabFile));
    ByteReader in(vocab.data(), vocab.size());
    std::uint32_t count = in.get_u32();
    t.tokens_.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      std::uint32_t len = in.get_u32();
      std::string token(len, '\0');
      in.get_bytes(token.data(), len);
      t.vocab_.emplace(token, static_cast<WordId>(i));
      t.tokens_.push_back(std::move(token));
    }
    if (!in.done()) fail(path(tmfmt::kVocabFile), ": trailing bytes");
  }

  {
    Bytes spill = read_checked(path(tmfmt::kSpillFile));
    ByteReader in(spill.data(), spill.size());
    std::uint32_t count = in.get_u32();
    t.spill_.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      SpillEntry e;
      std::uint32_t len = in.get_u32();
      e.key.resize(len);
      for (auto& w : e.key) w = in.get_u32();
      e.offset = in.get_u64();
      e.len = in.get_u32();
      t.spill_.push_back(std::move(e));
    }
    if (!in.done()) fail(path(tmfmt::kSpillFile), ": trailing bytes");
  }

  {
    Bytes cache = read_checked(path(tmfmt::kCacheFile));
    ByteReader in(cache.data(), cache.size());
    std::uint32_t manifest = in.get_u32();
    std::size_t keep = options.cache_size
                           ? std::min<std::size_t>(*options.cache_size, manifest)
                           : manifest;
    for (std::uint32_t i = 0; i < manifest; ++i) {
      std::uint32_t len = in.get_u32();
      std::vector<WordId> key(len);
      for (auto& w : key) w = in.get_u32();
      if (i >= keep) continue;
      TargetPhraseCollection collection;
      RuleTableStats ignored;
      const auto* found = t.lookup(key, collection, ignored);
      if (!found)
        fail(path(tmfmt::kCacheFile), ": manifest entry ", i,
             " names a source phrase the index does not hold");
      if (found != &collection) collection = *found;
      collection.source = key;
      t.cache_.emplace(std::move(key), std::move(collection));
    }
    if (!in.done()) fail(path(tmfmt::kCacheFile), ": trailing bytes");
  }

  return t;
}

const RuleTable::Slot* RuleTable::probe(std::span<const WordId> source) const {
  std::uint64_t fp = murmur64(source.data(), source.size() * sizeof(WordId), seed_);
  std::uint64_t at = fp & slot_mask_;
  for (std::uint64_t step = 0; step <= slot_mask_; ++step) {
    const Slot& s = slots_[at];
    if (!(s.flags & tmfmt::kSlotUsed)) return nullptr;
    if (s.fp == fp) return &s;
    at = (at + 1) & slot_mask_;
  }
  fail("rule table index has no empty slots; file is corrupt");
}

void RuleTable::decode_at(std::uint64_t offset, std::uint32_t len,
                          TargetPhraseCollection& out) const {
  if (offset > payload_.size() || payload_.size() - offset < len)
    fail("rule record at ", offset, "+", len, " lies outside the payload");
  decode_targets({payload_.data() + offset, len}, codec_, out);
}

const TargetPhraseCollection* RuleTable::lookup(std::span<const WordId> source,
                                                TargetPhraseCollection& scratch,
                                                RuleTableStats& stats) const {
  ++stats.lookups;
  if (!cache_.empty()) {
    auto it = cache_.find(source);
    if (it != cache_.end()) {
      ++stats.cache_hits;
      return &it->second;
    }
  }
  const Slot* s = probe(source);
  if (!s) {
    ++stats.misses;
    return nullptr;
  }
  std::uint64_t offset = s->offset;
  std::uint32_t len = s->len;
  if (s->flags & tmfmt::kSlotSpill) {
    auto it = std::lower_bound(
        spill_.begin(), spill_.end(), source,
        [](const SpillEntry& e, std::span<const WordId> key) {
          return std::lexicographical_compare(e.key.begin(), e.key.end(),
                                              key.begin(), key.end());
        });
    if (it == spill_.end() ||
        !std::equal(it->key.begin(), it->key.end(), source.begin(), source.end())) {
      ++stats.misses;
      return nullptr;
    }
    offset = it->offset;
    len = it->len;
  }
  decode_at(offset, len, scratch);
  ++stats.payload_decodes;
  scratch.source.assign(source.begin(), source.end());
  return &scratch;
}

std::optional<WordId> RuleTable::find_token(std::string_view token) const {
  auto it = vocab_.find(std::string(token));
  if (it == vocab_.end()) return std::nullopt;
  return it->second;
}

}  // namespace pbmt
