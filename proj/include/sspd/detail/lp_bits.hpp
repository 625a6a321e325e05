#pragma once

#include <cstdint>

// Rotations inside an LP of `width` <= 32 bits. Shared by the configuration
// code and the scanning path, so everything here stays integer-only.
namespace sspd::detail {

constexpr std::uint64_t low_mask(unsigned width) noexcept {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

/// Bits [start, start + count) of `lp`, wrapping modulo `width`.
constexpr std::uint32_t extract_wrapped(std::uint32_t lp, unsigned start, unsigned count,
                                        unsigned width) noexcept {
  const std::uint64_t v = lp & low_mask(width);
  const std::uint64_t rotated = ((v >> start) | (v << (width - start))) & low_mask(width);
  return static_cast<std::uint32_t>(rotated & low_mask(count));
}

/// Places `index` so its bit j lands on LP bit (start + j) mod width.
constexpr std::uint32_t deposit_wrapped(std::uint32_t index, unsigned start,
                                        unsigned width) noexcept {
  const std::uint64_t v = index;
  return static_cast<std::uint32_t>(((v << start) | (v >> (width - start))) & low_mask(width));
}

}  // namespace sspd::detail
