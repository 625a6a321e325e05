#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sspd/error.hpp"
#include "sspd/hashing.hpp"

using namespace sspd;

namespace {

// Pearson statistic of observed bucket counts against a uniform expectation.
double chi_square(const std::vector<std::uint64_t>& counts, double expected) {
  double s = 0;
  for (auto c : counts) s += (c - expected) * (c - expected) / expected;
  return s;
}

}  // namespace

TEST_CASE("mix64 matches reference splitmix64 outputs") {
  CHECK(mix64(0) == 0);
  CHECK(mix64(1) == 0x5692161d100b05e5ULL);
  CHECK(mix64(0x5EED) == 0xa18f67d4db95243fULL);
}

TEST_CASE("hash_full is pinned per seed and domain") {
  const HashSeed h1(0x5EED, tag::kSample);
  const HashSeed h2(0x5EED, tag::kSlot);
  CHECK(h1.key() == 0x4e89619dbf41e9c7ULL);
  CHECK(hash_full(0, h1) == 0x6f7460caU);
  CHECK(hash_full(1, h1) == 0x946698fdU);
  CHECK(hash_full(0x01020304, h1) == 0x7625e7d2U);
  CHECK(hash_full(0xFFFFFFFF, h1) == 0x71cc438aU);
  CHECK(hash_full(0x01020304, h2) == 0x7ddc8d6aU);
  CHECK(hash_range(0x01020304, HashSeed(0x5EED, tag::kRowBase), 1000) == 731);
}

TEST_CASE("lsb counts trailing zeros and maps zero to 32") {
  CHECK(lsb(0) == 32);
  CHECK(lsb(1) == 0);
  CHECK(lsb(8) == 3);
  CHECK(lsb(0x80000000u) == 31);
}

TEST_CASE("hash_range rejects an empty range and accepts the full one") {
  const HashSeed s(7, tag::kSlot);
  CHECK_THROWS_AS(hash_range(1, s, 0), Error);
  CHECK(hash_range(1, s, std::uint64_t{1} << 32) == hash_full(1, s));
  for (std::uint32_t key = 0; key < 1000; ++key) CHECK(hash_range(key, s, 13) < 13);
}

TEST_CASE("hash_range is uniform over buckets") {
  // 64 buckets, 2^16 sequential keys; chi-square df=63 critical value at p=0.001 is 103.4
  for (std::uint8_t t : {tag::kSample, tag::kSlot, tag::kLdcBit, std::uint8_t(tag::kRowBase + 3)}) {
    const HashSeed s(0x5EED, t);
    std::vector<std::uint64_t> counts(64);
    for (std::uint32_t key = 0; key < (1u << 16); ++key) ++counts[hash_range(key, s, 64)];
    CHECK(chi_square(counts, 1024.0) < 103.4);
  }
}

TEST_CASE("lsb of the sampling hash is geometric") {
  const HashSeed s(0x5EED, tag::kSample);
  constexpr std::uint32_t n = 1u << 18;
  std::array<std::uint64_t, 33> at_least{};
  for (std::uint32_t key = 0; key < n; ++key) {
    const unsigned z = lsb(hash_full(key, s));
    for (unsigned t = 0; t <= z; ++t) ++at_least[t];
  }
  for (unsigned t = 0; t <= 8; ++t) {
    const double p = std::ldexp(1.0, -static_cast<int>(t));
    const double sd = std::sqrt(n * p * (1 - p));
    CHECK(std::abs(static_cast<double>(at_least[t]) - n * p) <= 5 * sd + 1);
  }
}

TEST_CASE("domains are pairwise independent on the same key") {
  // joint 8x8 histogram of (H1 mod 8, H2 mod 8); df=63
  const HashSeed a(0x5EED, tag::kSample);
  const HashSeed b(0x5EED, tag::kSlot);
  std::vector<std::uint64_t> joint(64);
  for (std::uint32_t key = 0; key < (1u << 16); ++key)
    ++joint[hash_range(key, a, 8) * 8 + hash_range(key, b, 8)];
  CHECK(chi_square(joint, 1024.0) < 103.4);

  // linear correlation of the raw outputs
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const int n = 1 << 16;
  for (std::uint32_t key = 0; key < static_cast<std::uint32_t>(n); ++key) {
    const double x = hash_full(key, a), y = hash_full(key, b);
    sx += x, sy += y, sxx += x * x, syy += y * y, sxy += x * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double r = cov / std::sqrt((sxx / n - (sx / n) * (sx / n)) * (syy / n - (sy / n) * (sy / n)));
  CHECK(std::abs(r) < 0.02);
}

TEST_CASE("seed set expands one master seed into distinct domains") {
  const SeedSet s(42, 3);
  REQUIRE(s.rows.size() == 3);
  CHECK(s.sample.domain_tag() == tag::kSample);
  CHECK(s.rows[2].domain_tag() == tag::kRowBase + 2);
  CHECK(s.sample.key() != s.slot.key());
  CHECK(s.rows[0].key() != s.rows[1].key());
  CHECK(SeedSet(42, 3) == s);
  CHECK(!(SeedSet(43, 3) == s));
}
