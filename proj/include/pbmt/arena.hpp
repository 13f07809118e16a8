// arena.hpp -- per-worker memory pools and LIFO object recycling queues
//
// Decoding churns through short-lived objects (hypotheses, states). Worker
// threads allocate them from private bump-pointer pools instead of the
// process allocator: a pool grows by appending blocks, is emptied wholesale
// by reset(), and never shrinks. High-churn object classes additionally go
// through a recycling queue so slots are reused before the reset event.
#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <new>
#include <type_traits>
#include <unordered_set>
#include <vector>

namespace pbmt {

struct PoolStats {
  std::size_t total_capacity = 0;
  std::size_t high_water_mark = 0;
  std::size_t block_count = 0;
  std::size_t reset_count = 0;
};

// Single-owner: confined to one worker, transferable at quiescent points.
// Objects placed in a pool are never destructed, so only trivially
// destructible payloads may live here (enforced by the typed helpers).
class Pool {
 public:
  static constexpr std::size_t kDefaultBlockSize = 64 * 1024;
  static constexpr std::size_t kMaxBlockSize = 16 * 1024 * 1024;
  static constexpr std::size_t kMaxAlignment = 64;

  explicit Pool(std::size_t default_block_size = kDefaultBlockSize);
  Pool(const Pool&) = delete;
  Pool& operator=(const Pool&) = delete;
  Pool(Pool&&) noexcept = default;
  Pool& operator=(Pool&&) noexcept = default;

  // Aligned storage valid until the next reset. Alignment must be a power of
  // two <= kMaxAlignment. Requests larger than the default block size get a
  // dedicated block of exactly the requested size; the bump pointer over the
  // regular blocks is undisturbed.
  void* alloc(std::size_t size, std::size_t alignment = alignof(std::max_align_t));

  template <typename T>
  T* alloc_array(std::size_t n) {
    static_assert(std::is_trivially_destructible_v<T>,
                  "pool objects are never destructed");
    return static_cast<T*>(alloc(n * sizeof(T), alignof(T)));
  }

  template <typename T, typename... Args>
  T* create(Args&&... args) {
    static_assert(std::is_trivially_destructible_v<T>,
                  "pool objects are never destructed");
    return ::new (alloc(sizeof(T), alignof(T))) T(std::forward<Args>(args)...);
  }

  // Rewind to the start of the first block. No block is released and
  // capacity is unchanged; replaying an identical allocation sequence after
  // a reset yields the identical addresses.
  void reset();

  PoolStats stats() const;
  std::size_t used() const { return used_; }

  // Overwrite reused bytes with a sentinel at reset() so use-after-reset
  // reads surface in tests. Defaults to on in debug builds.
  void set_poison_on_reset(bool on) { poison_ = on; }

 private:
  struct AlignedDelete {
    void operator()(std::byte* p) const {
      ::operator delete[](p, std::align_val_t{kMaxAlignment});
    }
  };
  using BlockPtr = std::unique_ptr<std::byte[], AlignedDelete>;
  struct Block {
    BlockPtr data;
    std::size_t size = 0;
  };

  static Block make_block(std::size_t size);
  void* take(Block& block, std::size_t offset, std::size_t size);

  std::vector<Block> blocks_;      // bump-walked in order
  std::vector<Block> dedicated_;   // one oversized allocation each
  std::size_t block_index_ = 0;
  std::size_t offset_ = 0;
  std::size_t dedicated_cursor_ = 0;
  std::size_t default_block_size_;
  std::size_t next_block_size_;
  std::size_t total_capacity_ = 0;
  std::size_t used_ = 0;
  std::size_t high_water_mark_ = 0;
  std::size_t reset_count_ = 0;
  bool poison_;
};

// LIFO free list of fixed-size slots for one object class. Acquire returns
// the most recently recycled slot so the hottest memory is reused first.
// Single-owner, like the pool that backs it.
class RecyclingQueue {
 public:
  explicit RecyclingQueue(std::size_t slot_size,
                          std::size_t alignment = alignof(std::max_align_t));

  // Most recently recycled slot if any, else a fresh slot from `pool`.
  void* acquire(Pool& pool);

  // The slot must have been acquired and no longer be live. Recycling a
  // slot that is already free is a contract violation; it is detected when
  // checks are enabled (default in debug builds) and reported via fail().
  void recycle(void* slot);

  // Drop all free slots. Must be called when the backing pool resets.
  void clear();

  // Clear and switch to a new slot size (per-sentence sizing).
  void reconfigure(std::size_t slot_size);

  std::size_t slot_size() const { return slot_size_; }
  std::uint64_t acquired() const { return acquired_; }
  std::uint64_t recycled() const { return recycled_; }
  std::uint64_t fresh_allocations() const { return fresh_; }
  std::size_t free_count() const { return free_count_; }

  void set_checks(bool on) { checks_ = on; }

 private:
  struct FreeLink {
    FreeLink* next;
  };

  FreeLink* head_ = nullptr;
  std::size_t slot_size_;
  std::size_t alignment_;
  std::size_t free_count_ = 0;
  std::uint64_t acquired_ = 0;
  std::uint64_t recycled_ = 0;
  std::uint64_t fresh_ = 0;
  bool checks_;
  std::unordered_set<const void*> free_set_;  // populated only when checks_ is on
};

// The two pools every decoding worker owns: `persistent` lives for the whole
// run, `ephemeral` is reset after each sentence.
struct PoolPair {
  Pool persistent;
  Pool ephemeral;
};

}  // namespace pbmt
