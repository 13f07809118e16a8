// binio.hpp -- little-endian byte buffers, hashing and memory-mapped files
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "pbmt/common.hpp"

namespace pbmt {

using Bytes = std::vector<std::uint8_t>;

inline void put_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }

inline void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f32(Bytes& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

// LEB128-style: 7 bits per byte, high bit marks continuation.
void put_varint(Bytes& out, std::uint64_t v);

// Bounds-checked cursor over a byte span. Underflow or overlong varints
// raise Error; decoding never reads past the span.
class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size)
      : p_(data), end_(data + size) {}
  explicit ByteReader(std::span<const std::uint8_t> bytes)
      : ByteReader(bytes.data(), bytes.size()) {}

  std::size_t remaining() const { return static_cast<std::size_t>(end_ - p_); }
  bool done() const { return p_ == end_; }

  std::uint8_t get_u8();
  std::uint32_t get_u32();
  std::uint64_t get_u64();
  float get_f32();
  std::uint64_t get_varint();
  void get_bytes(void* out, std::size_t n);
  void skip(std::size_t n);

 private:
  void need(std::size_t n) const {
    if (remaining() < n) fail("truncated record: need ", n, " bytes, have ", remaining());
  }
  const std::uint8_t* p_;
  const std::uint8_t* end_;
};

// FNV-1a over the bytes.
std::uint64_t fnv1a(std::span<const std::uint8_t> bytes);

// 64-bit MurmurHash2 variant, used for source-phrase fingerprints.
std::uint64_t murmur64(const void* data, std::size_t len, std::uint64_t seed);

void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
Bytes read_file(const std::string& path);

// Read-only mmap of a whole file. Movable; unmaps on destruction.
class MappedFile {
 public:
  MappedFile() = default;
  static MappedFile open(const std::string& path);
  MappedFile(MappedFile&& o) noexcept;
  MappedFile& operator=(MappedFile&& o) noexcept;
  MappedFile(const MappedFile&) = delete;
  MappedFile& operator=(const MappedFile&) = delete;
  ~MappedFile();

  const std::uint8_t* data() const { return data_; }
  std::size_t size() const { return size_; }
  std::span<const std::uint8_t> bytes() const { return {data_, size_}; }

 private:
  const std::uint8_t* data_ = nullptr;
  std::size_t size_ = 0;
};

}  // namespace pbmt
