#include "pbmt/binio.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <utility>

namespace pbmt {

void put_varint(Bytes& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v) | 0x80);
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint8_t ByteReader::get_u8() {
  need(1);
  return *p_++;
}

std::uint32_t ByteReader::get_u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{p_[i]} << (8 * i);
  p_ += 4;
  return v;
}

std::uint64_t ByteReader::get_u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{p_[i]} << (8 * i);
  p_ += 8;
  return v;
}

float ByteReader::get_f32() { return std::bit_cast<float>(get_u32()); }

std::uint64_t ByteReader::get_varint() {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    need(1);
    std::uint8_t b = *p_++;
    v |= std::uint64_t{b & 0x7Fu} << shift;
    if (!(b & 0x80)) return v;
  }
  fail("overlong varint");
}

void ByteReader::get_bytes(void* out, std::size_t n) {
  need(n);
  std::memcpy(out, p_, n);
  p_ += n;
}

void ByteReader::skip(std::size_t n) {
  need(n);
  p_ += n;
}

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t murmur64(const void* data, std::size_t len, std::uint64_t seed) {
  const std::uint64_t m = 0xc6a4a7935bd1e995ull;
  const int r = 47;
  std::uint64_t h = seed ^ (len * m);
  const auto* p = static_cast<const std::uint8_t*>(data);
  const auto* end = p + (len & ~std::size_t{7});
  while (p != end) {
    std::uint64_t k;
    std::memcpy(&k, p, 8);
    p += 8;
    k *= m;
    k ^= k >> r;
    k *= m;
    h ^= k;
    h *= m;
  }
  if (len & 7) {
    std::uint64_t tail = 0;
    std::memcpy(&tail, p, len & 7);
    h ^= tail;
    h *= m;
  }
  h ^= h >> r;
  h *= m;
  h ^= h >> r;
  return h;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("cannot create file: ", path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail("short write: ", path);
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) fail("cannot open file: ", path);
  auto size = in.tellg();
  in.seekg(0);
  Bytes bytes(static_cast<std::size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) fail("short read: ", path);
  return bytes;
}

MappedFile MappedFile::open(const std::string& path) {
  int fd = ::open(path.c_str(), O_RDONLY);
  if (fd < 0) fail("cannot open file: ", path);
  struct stat st;
  if (fstat(fd, &st) != 0) {
    ::close(fd);
    fail("cannot stat file: ", path);
  }
  MappedFile f;
  f.size_ = static_cast<std::size_t>(st.st_size);
  if (f.size_ > 0) {
    void* p = mmap(nullptr, f.size_, PROT_READ, MAP_PRIVATE, fd, 0);
    if (p == MAP_FAILED) {
      ::close(fd);
      fail("mmap failed: ", path);
    }
    f.data_ = static_cast<const std::uint8_t*>(p);
  }
  ::close(fd);
  return f;
}

MappedFile::MappedFile(MappedFile&& o) noexcept
    : data_(std::exchange(o.data_, nullptr)), size_(std::exchange(o.size_, 0)) {}

MappedFile& MappedFile::operator=(MappedFile&& o) noexcept {
  if (this != &o) {
    this->~MappedFile();
    data_ = std::exchange(o.data_, nullptr);
    size_ = std::exchange(o.size_, 0);
  }
  return *this;
}

MappedFile::~MappedFile() {
  if (data_) munmap(const_cast<std::uint8_t*>(data_), size_);
}

}  // namespace pbmt
