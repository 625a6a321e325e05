#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "sspd/detail/lp_bits.hpp"
#include "sspd/error.hpp"
#include "sspd/short_sketch.hpp"
#include "support.hpp"

using namespace sspd;

namespace {

std::uint32_t naive_index(const SeavConfig& c, unsigned row, std::uint32_t lp) {
  std::uint32_t idx = 0;
  for (unsigned j = 0; j < c.index_bits[row]; ++j) {
    const unsigned pos = (c.index_start[row] + j) % c.lp_bits();
    idx |= ((lp >> pos) & 1u) << j;
  }
  return idx;
}

std::vector<SeavConfig> layouts() {
  return {make_seav_config(4, 4, 2, 1024), make_seav_config(0, 4, 2, 1024),
          make_seav_config(5, 3, 3, 1024), make_seav_config(2, 5, 1, 1024),
          make_seav_config(4, 3, 2, 64, 8, 16), make_seav_config(4, 4, 2, 1024, 8, 30)};
}

SeavSketch sketch_with(const SeavConfig& c, const std::vector<IpPair>& pairs,
                       std::uint64_t seed = kDefaultMasterSeed) {
  SeavSketch s(c, SeedSet(seed, 1));
  for (const auto& p : pairs) s.update(p.hip, p.oip);
  return s;
}

// Every (rp, lp) whose registers are all hot and whose AND keeps >= 3 bits,
// by exhaustive scan of the LP space.
std::vector<CandidateHost> brute_force_restore(const SeavSketch& s) {
  const auto& c = s.config();
  std::vector<CandidateHost> out;
  for (std::uint32_t rp = 0; rp < c.array_count(); ++rp) {
    for (std::uint32_t lp = 0; lp < (1u << c.lp_bits()); ++lp) {
      std::uint64_t bits = ~std::uint64_t{0};
      bool all_hot = true;
      for (unsigned row = 0; row < c.rows; ++row) {
        const auto se = s.estimator(rp, row, naive_index(c, row, lp));
        all_hot = all_hot && se.is_hot();
        bits &= se.bits();
      }
      const auto w = static_cast<unsigned>(std::popcount(bits));
      if (all_hot && w >= ShortEstimator::kHotWeight) out.push_back({(lp << c.r) | rp, rp, w});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.ip < b.ip; });
  return out;
}

// Cartesian product of hot registers with a consistency check afterwards; no
// pruning at all.
std::vector<CandidateHost> unpruned_restore(const SeavSketch& s) {
  const auto& c = s.config();
  std::vector<CandidateHost> out;
  for (std::uint32_t rp = 0; rp < c.array_count(); ++rp) {
    std::vector<std::vector<std::uint32_t>> hot(c.rows);
    for (unsigned row = 0; row < c.rows; ++row)
      for (std::uint32_t col = 0; col < c.row_width[row]; ++col)
        if (s.estimator(rp, row, col).is_hot()) hot[row].push_back(col);
    if (std::any_of(hot.begin(), hot.end(), [](const auto& h) { return h.empty(); })) continue;
    std::vector<std::size_t> pick(c.rows, 0);
    while (true) {
      std::vector<std::uint32_t> idx(c.rows);
      std::uint64_t bits = ~std::uint64_t{0};
      for (unsigned row = 0; row < c.rows; ++row) {
        idx[row] = hot[row][pick[row]];
        bits &= s.estimator(rp, row, idx[row]).bits();
      }
      std::uint32_t lp = 0;
      const auto w = static_cast<unsigned>(std::popcount(bits));
      if (lp_from_indices_checked(c, idx, lp) && w >= ShortEstimator::kHotWeight)
        out.push_back({(lp << c.r) | rp, rp, w});
      unsigned row = 0;
      while (row < c.rows && ++pick[row] == hot[row].size()) pick[row++] = 0;
      if (row == c.rows) break;
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.ip < b.ip; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const auto& a, const auto& b) { return a.ip == b.ip; }),
            out.end());
  return out;
}

}  // namespace

TEST_CASE("tau is the smallest t with g * 2^t >= theta") {
  CHECK(tau_from_theta(1000, 8) == 7);
  CHECK(tau_from_theta(1024, 8) == 7);
  CHECK(tau_from_theta(1025, 8) == 8);
  CHECK(tau_from_theta(8, 8) == 0);
  CHECK(tau_from_theta(1, 8) == 0);
  CHECK(tau_from_theta(64, 16) == 2);
}

TEST_CASE("short estimator weight, hotness and bitwise ops") {
  ShortEstimator se(8);
  CHECK(se.weight() == 0);
  se.set(1);
  se.set(4);
  CHECK_FALSE(se.is_hot());
  se.set(4);
  CHECK(se.weight() == 2);
  se.set(7);
  CHECK(se.is_hot());
  CHECK_THROWS_AS(se.set(8), Error);

  const ShortEstimator a(8, 0b1011'0110), b(8, 0b0110'0011);
  CHECK(se_and(a, b).bits() == 0b0010'0010);
  CHECK(se_or(a, b).bits() == 0b1111'0111);
  CHECK_THROWS_AS(se_and(a, ShortEstimator(16, 1)), Error);
  CHECK_THROWS_AS(se_or(a, ShortEstimator(4, 1)), Error);
}

TEST_CASE("se_update samples at rate 2^-tau and is idempotent") {
  const SeedSet seeds(kDefaultMasterSeed, 1);
  ShortEstimator se(8);
  se = se_update(se, 12345, 0, seeds);
  CHECK(se.weight() == 1);
  CHECK(se_update(se, 12345, 0, seeds) == se);

  constexpr std::uint32_t n = 100000;
  std::uint32_t sampled = 0;
  for (std::uint32_t oip = 0; oip < n; ++oip)
    if (se_update(ShortEstimator(8), oip, 7, seeds).weight() == 1) ++sampled;
  const double expected = n / 128.0;
  CHECK(std::abs(sampled - expected) < 5 * std::sqrt(expected));
}

TEST_CASE("se_update hot probability matches the occupancy oracle") {
  // P(weight >= 3) for n distinct oips, tau = 7, g = 8: binomial sampling
  // followed by balls-in-bins occupancy, evaluated exactly offline.
  struct Case {
    std::uint32_t n;
    double p_hot;
  };
  for (const Case c : {Case{512, 0.6717333494178511}, Case{1024, 0.9677129786170247},
                       Case{128, 0.05703851017638575}}) {
    constexpr int trials = 2000;
    int hot = 0;
    for (int t = 0; t < trials; ++t) {
      const SeedSet seeds(1000 + t, 1);
      ShortEstimator se(8);
      for (std::uint32_t oip = 0; oip < c.n; ++oip) se = se_update(se, oip, 7, seeds);
      hot += se.is_hot();
    }
    const double sd = std::sqrt(c.p_hot * (1 - c.p_hot) / trials);
    CHECK(std::abs(hot / double(trials) - c.p_hot) < 4.5 * sd);
  }
}

TEST_CASE("default layout") {
  const auto c = make_seav_config(4, 4, 2, 1024);
  CHECK(c.tau == 7);
  CHECK(c.lp_bits() == 28);
  CHECK(c.index_start == std::vector<unsigned>{0, 7, 14, 21});
  CHECK(c.index_bits == std::vector<unsigned>{9, 9, 9, 9});
  CHECK(c.row_width == std::vector<std::uint32_t>{512, 512, 512, 512});
  CHECK(c.memory_bytes() == 32768);

  const auto r0 = make_seav_config(0, 4, 2, 1024);
  CHECK(r0.index_start == std::vector<unsigned>{0, 8, 16, 24});
  CHECK(r0.index_bits == std::vector<unsigned>{10, 10, 10, 10});
}

TEST_CASE("invalid layouts are rejected") {
  CHECK_THROWS_AS(make_seav_config(4, 4, 0, 1024), Error);
  CHECK_THROWS_AS(make_seav_config(4, 1, 2, 1024), Error);
  CHECK_THROWS_AS(make_seav_config(0, 2, 10, 1024), Error);  // 26 index bits
  CHECK_THROWS_AS(make_seav_config(4, 4, 2, 0), Error);
  CHECK_THROWS_AS(make_seav_config(4, 4, 2, 1024, 2), Error);
  CHECK_THROWS_AS(make_seav_config(32, 4, 2, 1024), Error);

  auto c = make_seav_config(4, 4, 2, 1024);
  c.index_start[2] = 16;  // rows 1 and 2 no longer chain
  c.index_start[3] = 23;
  try {
    validate_seav_config(c);
    FAIL("expected a constraint violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config_invalid);
  }
}

TEST_CASE("index_of agrees with a per-bit oracle and inverts exactly") {
  std::mt19937_64 rng(7);
  for (const auto& c : layouts()) {
    CAPTURE(c.r);
    CAPTURE(c.rows);
    const auto mask = static_cast<std::uint32_t>(detail::low_mask(c.lp_bits()));
    for (int i = 0; i < 20000; ++i) {
      const auto lp = static_cast<std::uint32_t>(rng()) & mask;
      std::vector<std::uint32_t> idx(c.rows);
      for (unsigned row = 0; row < c.rows; ++row) {
        idx[row] = index_of(c, row, lp);
        REQUIRE(idx[row] == naive_index(c, row, lp));
        REQUIRE(idx[row] < c.row_width[row]);
      }
      std::uint32_t back = 0;
      REQUIRE(lp_from_indices_checked(c, idx, back));
      REQUIRE(back == lp);
      REQUIRE(lp_from_indices(c, idx) == lp);
    }
  }
}

TEST_CASE("inconsistent index tuples are detected") {
  const auto c = make_seav_config(4, 4, 2, 1024);
  const std::uint32_t lp = 0x0ABCDEF;
  std::vector<std::uint32_t> idx(c.rows);
  for (unsigned row = 0; row < c.rows; ++row) idx[row] = index_of(c, row, lp);
  idx[1] ^= 1u;  // bit 0 of row 1 is LP bit 7, shared with row 0
  std::uint32_t back = 0;
  CHECK_FALSE(lp_from_indices_checked(c, idx, back));
  CHECK_THROWS_AS(lp_from_indices(c, std::vector<std::uint32_t>(3)), Error);
}

TEST_CASE("positions are one register per row, inside the host's array") {
  const auto c = make_seav_config(4, 4, 2, 8);  // tau 0: every oip sampled
  SeavSketch s(c, SeedSet(kDefaultMasterSeed, 1));
  std::vector<std::size_t> pos(c.rows);
  const std::uint32_t hip = 0xC0A80117;
  REQUIRE(s.positions(hip, 99, pos) == c.rows);
  const std::uint32_t rp = hip & 0xF, lp = hip >> 4;
  for (unsigned row = 0; row < c.rows; ++row) {
    const auto reg = s.register_index(rp, row, index_of(c, row, lp));
    CHECK(pos[row] / c.g == reg);
  }
  // same oip lands on the same bit of each register
  for (unsigned row = 1; row < c.rows; ++row) CHECK(pos[row] % c.g == pos[0] % c.g);
}

TEST_CASE("restore matches exhaustive and unpruned oracles on a 12-bit LP") {
  const auto c = make_seav_config(4, 3, 2, 64, 8, 16);
  REQUIRE(c.lp_bits() == 12);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed);
    std::vector<IpPair> pairs;
    std::vector<std::uint32_t> heavy;
    for (int h = 0; h < 6; ++h) {
      const auto hip = static_cast<std::uint32_t>(rng() & 0xFFFF);
      heavy.push_back(hip);
      for (std::uint32_t i = 0; i < 200; ++i) pairs.push_back({hip, static_cast<std::uint32_t>(rng())});
    }
    for (int i = 0; i < 3000; ++i)
      pairs.push_back({static_cast<std::uint32_t>(rng() & 0xFFFF), static_cast<std::uint32_t>(rng())});
    const auto s = sketch_with(c, pairs, seed);

    const auto restored = s.restore();
    CHECK(restored.overflowed.empty());
    const auto expected = brute_force_restore(s);
    CHECK(restored.candidates == expected);
    CHECK(unpruned_restore(s) == expected);
    for (auto hip : heavy) {
      const bool found = std::any_of(expected.begin(), expected.end(),
                                     [&](const auto& ch) { return ch.ip == hip; });
      CHECK(found);
    }
  }
}

TEST_CASE("restore finds every host whose own registers stay hot") {
  const auto c = make_seav_config(4, 4, 2, 1024);
  const auto pairs = test::mixed_traffic(30, 2048, 200000, 11);
  const auto s = sketch_with(c, pairs);
  const auto restored = s.restore();
  CHECK(restored.overflowed.empty());

  std::vector<std::uint32_t> heavy;
  for (const auto& p : pairs) heavy.push_back(p.hip);
  std::sort(heavy.begin(), heavy.end());
  std::vector<std::uint32_t> hosts;
  for (auto it = heavy.begin(); it != heavy.end();) {
    auto end = std::upper_bound(it, heavy.end(), *it);
    if (end - it >= 2048) hosts.push_back(*it);
    it = end;
  }
  REQUIRE(hosts.size() == 30);
  for (auto hip : hosts) {
    std::uint64_t bits = ~std::uint64_t{0};
    bool hot = true;
    for (unsigned row = 0; row < c.rows; ++row) {
      const auto se = s.estimator(hip & 0xF, row, index_of(c, row, hip >> 4));
      hot = hot && se.is_hot();
      bits &= se.bits();
    }
    const bool found = std::binary_search(
        restored.candidates.begin(), restored.candidates.end(), CandidateHost{hip, 0, 0},
        [](const auto& a, const auto& b) { return a.ip < b.ip; });
    CHECK(found == (hot && std::popcount(bits) >= 3));
  }
}

TEST_CASE("restore cap overflows per array") {
  const auto c = make_seav_config(4, 3, 2, 8, 8, 16);  // tau 0: dense
  const auto s = sketch_with(c, test::random_pairs(20000, 5));
  const auto full = s.restore();
  const auto capped = s.restore(4);
  CHECK(!capped.overflowed.empty());
  CHECK(std::is_sorted(capped.overflowed.begin(), capped.overflowed.end()));
  for (const auto& ch : capped.candidates) {
    CHECK(!std::binary_search(capped.overflowed.begin(), capped.overflowed.end(), ch.source_sea));
  }
  CHECK(capped.candidates.size() < full.candidates.size());
}

TEST_CASE("parallel restore equals serial restore") {
  const auto c = make_seav_config(4, 4, 2, 1024);
  const auto s = sketch_with(c, test::mixed_traffic(20, 2048, 100000, 3));
  const auto one = s.restore(kDefaultRestoreCap, 1);
  const auto many = s.restore(kDefaultRestoreCap, 5);
  CHECK(one.candidates == many.candidates);
  CHECK(one.overflowed == many.overflowed);
}

TEST_CASE("sharded updates merge to the single sketch, in any order") {
  const auto c = make_seav_config(4, 4, 2, 1024);
  const auto pairs = test::mixed_traffic(5, 3000, 50000, 9);
  const auto whole = sketch_with(c, pairs);

  std::vector<SeavSketch> shards(4, SeavSketch(c, SeedSet(kDefaultMasterSeed, 1)));
  for (std::size_t i = 0; i < pairs.size(); ++i) shards[(i * 2654435761u) % 4].update(pairs[i].hip, pairs[i].oip);
  SeavSketch forward = shards[0], backward = shards[3];
  for (int i = 1; i < 4; ++i) forward.merge(shards[i]);
  for (int i = 2; i >= 0; --i) backward.merge(shards[i]);
  CHECK(forward == whole);
  CHECK(backward == whole);

  SeavSketch twice = whole;
  twice.merge(whole);
  CHECK(twice == whole);

  const SeavSketch other_seed(c, SeedSet(1, 1));
  CHECK_THROWS_AS(twice.merge(other_seed), Error);
  const SeavSketch other_layout(make_seav_config(3, 4, 2, 1024), SeedSet(kDefaultMasterSeed, 1));
  CHECK_THROWS_AS(twice.merge(other_layout), Error);
}

TEST_CASE("concurrent updates equal serial updates") {
  const auto c = make_seav_config(4, 4, 2, 64);
  const auto pairs = test::random_pairs(200000, 21);
  const auto serial = sketch_with(c, pairs);
  SeavSketch shared(c, SeedSet(kDefaultMasterSeed, 1));
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < 4; ++t)
      workers.emplace_back([&, t] {
        for (std::size_t i = t; i < pairs.size(); i += 4) shared.update(pairs[i].hip, pairs[i].oip);
      });
  }
  CHECK(shared == serial);
}
