#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sspd/types.hpp"
#include "sspd/window_detector.hpp"

namespace sspd::test {

/// Small layout for fast tests: 8 short arrays, 64 long counters of 1024 bits.
inline DetectorConfig small_config(std::uint32_t theta = 1024) {
  DetectorConfig c;
  c.seav = make_seav_config(3, 4, 2, theta);
  c.ldca = LdcaConfig{4, 16, 1024};
  return c;
}

/// `n` distinct opposite hosts starting at `first_oip`.
inline std::vector<IpPair> host_pairs(std::uint32_t hip, std::uint32_t n,
                                      std::uint32_t first_oip = 0x0A000000) {
  std::vector<IpPair> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.push_back({hip, first_oip + i});
  return out;
}

inline std::vector<IpPair> random_pairs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<IpPair> out(n);
  for (auto& p : out) {
    p.hip = static_cast<std::uint32_t>(rng());
    p.oip = static_cast<std::uint32_t>(rng());
  }
  return out;
}

/// A few heavy hosts mixed into light random traffic, shuffled.
inline std::vector<IpPair> mixed_traffic(std::uint32_t heavy, std::uint32_t heavy_cardinality,
                                         std::size_t light, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<IpPair> out = random_pairs(light, seed ^ 0xABCDEF);
  for (std::uint32_t h = 0; h < heavy; ++h) {
    const auto hip = static_cast<std::uint32_t>(rng());
    const auto base = static_cast<std::uint32_t>(rng());
    for (std::uint32_t i = 0; i < heavy_cardinality; ++i) out.push_back({hip, base + i * 7919u});
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace sspd::test
