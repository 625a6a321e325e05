#include "sspd/hashing.hpp"

#include "sspd/error.hpp"

namespace sspd {

std::uint32_t hash_range(std::uint32_t key, const HashSeed& seed, std::uint64_t m) {
  if (m == 0) fail(ErrorCode::invalid_argument, "hash_range: modulus must be >= 1");
  if (m > (std::uint64_t{1} << 32)) {
    fail(ErrorCode::invalid_argument, "hash_range: modulus exceeds 2^32");
  }
  return hash_range_unchecked(key, seed, m);
}

SeedSet::SeedSet(std::uint64_t master_seed, unsigned ldca_rows)
    : master(master_seed),
      sample(master_seed, tag::kSample),
      slot(master_seed, tag::kSlot),
      ldc_bit(master_seed, tag::kLdcBit) {
  if (ldca_rows > 0xFFu - tag::kRowBase) {
    fail(ErrorCode::invalid_argument, "too many long-estimator rows for the seed space");
  }
  rows.reserve(ldca_rows);
  for (unsigned i = 0; i < ldca_rows; ++i) {
    rows.emplace_back(master_seed, static_cast<std::uint8_t>(tag::kRowBase + i));
  }
}

}  // namespace sspd
