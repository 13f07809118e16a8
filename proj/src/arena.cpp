#include "pbmt/arena.hpp"

#include <cstring>

#include "pbmt/common.hpp"

namespace pbmt {

namespace {

constexpr std::byte kPoisonByte{0xDD};

bool is_pow2(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::size_t align_up(std::size_t v, std::size_t a) {
  return (v + a - 1) & ~(a - 1);
}

bool default_poison() {
#ifdef NDEBUG
  return false;
#else
  return true;
#endif
}

}  // namespace

Pool::Block Pool::make_block(std::size_t size) {
  auto* raw = static_cast<std::byte*>(
      ::operator new[](size, std::align_val_t{kMaxAlignment}));
  return Block{BlockPtr(raw), size};
}

Pool::Pool(std::size_t default_block_size)
    : default_block_size_(default_block_size),
      next_block_size_(default_block_size),
      poison_(default_poison()) {
  assert(default_block_size_ >= kMaxAlignment);
  blocks_.push_back(make_block(default_block_size_));
  total_capacity_ = default_block_size_;
}

void* Pool::take(Block& block, std::size_t offset, std::size_t size) {
  used_ += (offset - offset_) + size;  // padding counts as use
  if (used_ > high_water_mark_) high_water_mark_ = used_;
  offset_ = offset + size;
  return block.data.get() + offset;
}

void* Pool::alloc(std::size_t size, std::size_t alignment) {
  if (!is_pow2(alignment) || alignment > kMaxAlignment)
    fail("pool alignment must be a power of two <= ",
         std::to_string(kMaxAlignment));

  // Oversized requests bypass the bump walk entirely: they get dedicated
  // blocks with their own cursor, which keeps replay-after-reset exact.
  if (size + alignment - 1 > default_block_size_) {
    while (dedicated_cursor_ < dedicated_.size() &&
           dedicated_[dedicated_cursor_].size < size)
      ++dedicated_cursor_;
    if (dedicated_cursor_ == dedicated_.size()) {
      dedicated_.push_back(make_block(size));
      total_capacity_ += size;
    }
    Block& block = dedicated_[dedicated_cursor_++];
    used_ += size;
    if (used_ > high_water_mark_) high_water_mark_ = used_;
    return block.data.get();  // block base is 64-aligned
  }

  while (true) {
    Block& block = blocks_[block_index_];
    std::size_t at = align_up(offset_, alignment);
    if (at + size <= block.size) return take(block, at, size);
    if (block_index_ + 1 == blocks_.size()) {
      blocks_.push_back(make_block(next_block_size_));
      total_capacity_ += next_block_size_;
      next_block_size_ = std::min(next_block_size_ * 2, kMaxBlockSize);
    }
    ++block_index_;
    offset_ = 0;
  }
}

void Pool::reset() {
  if (poison_) {
    for (std::size_t i = 0; i < block_index_; ++i)
      std::memset(blocks_[i].data.get(), static_cast<int>(kPoisonByte),
                  blocks_[i].size);
    std::memset(blocks_[block_index_].data.get(),
                static_cast<int>(kPoisonByte), offset_);
    for (std::size_t i = 0; i < dedicated_cursor_; ++i)
      std::memset(dedicated_[i].data.get(), static_cast<int>(kPoisonByte),
                  dedicated_[i].size);
  }
  block_index_ = 0;
  offset_ = 0;
  dedicated_cursor_ = 0;
  used_ = 0;
  ++reset_count_;
}

PoolStats Pool::stats() const {
  PoolStats s;
  s.total_capacity = total_capacity_;
  s.high_water_mark = high_water_mark_;
  s.block_count = blocks_.size() + dedicated_.size();
  s.reset_count = reset_count_;
  return s;
}

RecyclingQueue::RecyclingQueue(std::size_t slot_size, std::size_t alignment)
    : slot_size_(std::max(slot_size, sizeof(FreeLink))),
      alignment_(std::max(alignment, alignof(FreeLink))),
      checks_(!default_poison() ? false : true) {}

void* RecyclingQueue::acquire(Pool& pool) {
  ++acquired_;
  if (head_ != nullptr) {
    FreeLink* slot = head_;
    head_ = slot->next;
    --free_count_;
    if (checks_) free_set_.erase(slot);
    return slot;
  }
  ++fresh_;
  return pool.alloc(slot_size_, alignment_);
}

void RecyclingQueue::recycle(void* slot) {
  if (checks_ && !free_set_.insert(slot).second)
    fail("RecyclingQueue: slot recycled twice without an acquire");
  ++recycled_;
  auto* link = static_cast<FreeLink*>(slot);
  link->next = head_;
  head_ = link;
  ++free_count_;
}

void RecyclingQueue::clear() {
  head_ = nullptr;
  free_count_ = 0;
  free_set_.clear();
}

void RecyclingQueue::reconfigure(std::size_t slot_size) {
  clear();
  slot_size_ = std::max(slot_size, sizeof(FreeLink));
}

}  // namespace pbmt
