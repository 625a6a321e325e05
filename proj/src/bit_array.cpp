#include "sspd/bit_array.hpp"

#include <bit>

#include "sspd/error.hpp"

namespace sspd {

BitArray::BitArray(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

std::uint64_t BitArray::extract(std::size_t offset, unsigned width) const noexcept {
  if (width == 0) return 0;
  const std::size_t word = offset >> 6;
  const unsigned shift = offset & 63;
  std::uint64_t value = words_[word] >> shift;
  if (shift != 0 && shift + width > 64) value |= words_[word + 1] << (64 - shift);
  return width == 64 ? value : value & ((std::uint64_t{1} << width) - 1);
}

std::size_t BitArray::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::size_t BitArray::count_range(std::size_t offset, std::size_t len) const noexcept {
  std::size_t n = 0;
  while (len >= 64) {
    n += static_cast<std::size_t>(std::popcount(extract(offset, 64)));
    offset += 64;
    len -= 64;
  }
  if (len > 0) {
    n += static_cast<std::size_t>(
        std::popcount(extract(offset, static_cast<unsigned>(len))));
  }
  return n;
}

void BitArray::clear() noexcept {
  for (auto& w : words_) w = 0;
}

void BitArray::or_with(const BitArray& other) {
  if (other.bits_ != bits_) {
    fail(ErrorCode::invalid_argument, "bit array size mismatch in OR-merge");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
}

std::vector<std::uint8_t> BitArray::to_bytes() const {
  std::vector<std::uint8_t> out(byte_size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(words_[i >> 3] >> ((i & 7) * 8));
  }
  return out;
}

BitArray BitArray::from_bytes(std::span<const std::uint8_t> bytes, std::size_t bits) {
  BitArray out(bits);
  if (bytes.size() != out.byte_size()) {
    fail(ErrorCode::truncated, "register payload has " + std::to_string(bytes.size()) +
                                   " bytes, expected " + std::to_string(out.byte_size()));
  }
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    out.words_[i >> 3] |= std::uint64_t{bytes[i]} << ((i & 7) * 8);
  }
  // bits past size() must stay zero so equality and popcounts are exact
  if (bits % 64 != 0 && !out.words_.empty()) {
    out.words_.back() &= (std::uint64_t{1} << (bits % 64)) - 1;
  }
  return out;
}

}  // namespace sspd
