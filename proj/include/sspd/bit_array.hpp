#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sspd {

// Fixed-size bit vector backing every sketch register. Bit i lives in byte
// i / 8 at position i % 8 of the serialized form.
class BitArray {
 public:
  BitArray() = default;
  explicit BitArray(std::size_t bits);

  std::size_t size() const noexcept { return bits_; }
  std::size_t byte_size() const noexcept { return (bits_ + 7) / 8; }

  bool test(std::size_t i) const noexcept {
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }

  void set(std::size_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }

  // Safe against concurrent set_atomic() calls on the same array.
  void set_atomic(std::size_t i) noexcept {
    std::atomic_ref<std::uint64_t> word(words_[i >> 6]);
    word.fetch_or(std::uint64_t{1} << (i & 63), std::memory_order_relaxed);
  }

  /// Reads `width` (<= 64) bits starting at `offset`.
  std::uint64_t extract(std::size_t offset, unsigned width) const noexcept;

  std::size_t count() const noexcept;
  std::size_t count_range(std::size_t offset, std::size_t len) const noexcept;

  void clear() noexcept;
  void or_with(const BitArray& other);

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  std::vector<std::uint8_t> to_bytes() const;
  static BitArray from_bytes(std::span<const std::uint8_t> bytes, std::size_t bits);

  friend bool operator==(const BitArray&, const BitArray&) = default;

 private:
  std::size_t bits_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace sspd
