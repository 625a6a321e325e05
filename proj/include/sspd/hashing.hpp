#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace sspd {

// Role discriminators for the hash family. Row hashes of the long estimator
// use kRowBase + row.
namespace tag {
inline constexpr std::uint8_t kSample = 0x01;  // H1: sampling decision
inline constexpr std::uint8_t kSlot = 0x02;    // H2: bit inside a short register
inline constexpr std::uint8_t kLdcBit = 0x03;  // H3: bit inside a linear counter
inline constexpr std::uint8_t kRowBase = 0x10;  // LH_i: column of row i
}  // namespace tag

inline constexpr std::uint64_t kDefaultMasterSeed = 0x5EED;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

class HashSeed {
 public:
  constexpr HashSeed() noexcept : HashSeed(kDefaultMasterSeed, 0) {}
  constexpr HashSeed(std::uint64_t seed, std::uint8_t domain_tag) noexcept
      : seed_(seed),
        domain_tag_(domain_tag),
        key_(mix64(seed ^ (std::uint64_t{domain_tag} * 0x9e3779b97f4a7c15ULL))) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr std::uint8_t domain_tag() const noexcept { return domain_tag_; }
  constexpr std::uint64_t key() const noexcept { return key_; }

  friend constexpr bool operator==(const HashSeed&, const HashSeed&) = default;

 private:
  std::uint64_t seed_;
  std::uint8_t domain_tag_;
  std::uint64_t key_;
};

/// Uniform 32-bit image of a 32-bit key.
constexpr std::uint32_t hash_full(std::uint32_t key, const HashSeed& seed) noexcept {
  return static_cast<std::uint32_t>(mix64(std::uint64_t{key} + seed.key()) >> 32);
}

/// Maps a key into [0, m) by multiply-shift of the full hash. Callers on the
/// scanning path guarantee m >= 1; hash_range() checks it.
constexpr std::uint32_t hash_range_unchecked(std::uint32_t key, const HashSeed& seed,
                                             std::uint64_t m) noexcept {
  return static_cast<std::uint32_t>((std::uint64_t{hash_full(key, seed)} * m) >> 32);
}

std::uint32_t hash_range(std::uint32_t key, const HashSeed& seed, std::uint64_t m);

/// Index of the lowest set bit; 32 for zero.
constexpr unsigned lsb(std::uint32_t x) noexcept {
  return static_cast<unsigned>(std::countr_zero(x));
}

/// Every seed used by one detector, expanded from a single master seed.
struct SeedSet {
  std::uint64_t master = kDefaultMasterSeed;
  HashSeed sample{master, tag::kSample};
  HashSeed slot{master, tag::kSlot};
  HashSeed ldc_bit{master, tag::kLdcBit};
  std::vector<HashSeed> rows;

  SeedSet() = default;
  SeedSet(std::uint64_t master_seed, unsigned ldca_rows);

  friend bool operator==(const SeedSet&, const SeedSet&) = default;
};

}  // namespace sspd
