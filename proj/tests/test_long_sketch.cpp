#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sspd/error.hpp"
#include "sspd/long_sketch.hpp"
#include "support.hpp"

using namespace sspd;

TEST_CASE("linear counting estimate") {
  CHECK(ldc_estimate(512, 1024).value == doctest::Approx(709.782712893384).epsilon(1e-12));
  CHECK_FALSE(ldc_estimate(512, 1024).saturated);
  CHECK(ldc_estimate(1024, 1024).value == 0.0);
  const auto full = ldc_estimate(0, 1024);
  CHECK(full.saturated);
  CHECK(full.value == doctest::Approx(7097.82712893384).epsilon(1e-12));
  CHECK_THROWS_AS(ldc_estimate(1025, 1024), Error);
  CHECK_THROWS_AS(ldc_estimate(0, 0), Error);
}

TEST_CASE("ldc occupancy follows k * exp(-n / k)") {
  // 1024 distinct items into 8192 bits: E[zeros] = k (1 - 1/k)^n ~ 7229.41
  const double expected = 8192 * std::pow(1 - 1.0 / 8192, 1024);
  CHECK(expected == doctest::Approx(7229.41).epsilon(1e-4));
  double sum = 0;
  constexpr int trials = 200;
  for (int t = 0; t < trials; ++t) {
    Ldc ldc(8192);
    const HashSeed seed(t, tag::kLdcBit);
    for (std::uint32_t oip = 0; oip < 1024; ++oip) ldc.update(oip, seed);
    sum += static_cast<double>(ldc.zero_count());
  }
  // per-trial sd of the zero count is about 28
  CHECK(std::abs(sum / trials - expected) < 5 * 28 / std::sqrt(trials));
}

TEST_CASE("ldc update is idempotent per item") {
  Ldc ldc(1024);
  const HashSeed seed(3, tag::kLdcBit);
  ldc.update(77, seed);
  const auto once = ldc.bits();
  ldc.update(77, seed);
  CHECK(ldc.bits() == once);
  CHECK(ldc.zero_count() == 1023);
}

TEST_CASE("psu matches direct evaluation") {
  CHECK(psu(64, 64, 1, 1) == doctest::Approx(0.6350134757560926).epsilon(1e-12));
  CHECK(psu(1024, 1e5, 128, 2) ==
        doctest::Approx(std::pow(1 - std::pow(1 - 1.0 / 1024, 1e5 / 128), 2)).epsilon(1e-12));
  CHECK(psu(8192, 0, 10, 3) == 0.0);
  CHECK_THROWS_AS(psu(0.5, 10, 1, 1), Error);
  CHECK_THROWS_AS(psu(8, 10, 0, 1), Error);
}

TEST_CASE("planner: worked example and clamp") {
  const auto plan = plan_rows(8192, 1e6, 8192);
  CHECK(plan.optimal_rows == doctest::Approx(46.513480683563444).epsilon(1e-9));
  CHECK(plan.unclamped_rows == 47);
  CHECK(plan.rows == 8);
  CHECK(plan.columns == 1024);
  CHECK(plan.psu == doctest::Approx(psu(8192, 1e6, 1024, 8)));
  CHECK(plan.noise == doctest::Approx(plan.psu * 8192));
  CHECK(plan.noise_ok());

  const auto free = plan_rows(8192, 1e6, 8192, 0);
  CHECK(free.rows == 47);
  CHECK(free.columns == 8192 / 47);

  const auto tight = plan_rows(2048, 1e6, 8192);
  CHECK(tight.rows == 8);
  CHECK(tight.columns == 256);
  CHECK_FALSE(tight.noise_ok());

  CHECK_THROWS_AS(plan_rows(0, 1e6, 8192), Error);
  CHECK_THROWS_AS(plan_rows(100, 0, 8192), Error);
}

TEST_CASE("planner row count is the integer minimiser of psu at fixed V") {
  struct Triple {
    std::uint64_t v;
    double n;
    std::uint32_t k;
  };
  for (const Triple t : {Triple{8192, 1e6, 8192}, Triple{2048, 1e5, 1024}, Triple{4096, 5e5, 4096},
                         Triple{1000, 2e6, 8192}, Triple{300, 1e4, 512}}) {
    CAPTURE(t.v);
    const auto plan = plan_rows(t.v, t.n, t.k, 0);
    const auto at = [&](double lr) { return psu(t.k, t.n, t.v / lr, lr); };
    const double best = at(plan.unclamped_rows);
    for (std::uint32_t lr = 1; lr <= 200; ++lr) CHECK(best <= at(lr) * (1 + 1e-12));
  }
}

TEST_CASE("ldca layout, memory and config errors") {
  const LdcaConfig c{8, 1024, 8192};
  CHECK(c.memory_bytes() == 8u * 1024 * 8192 / 8);
  CHECK_THROWS_AS(validate_ldca_config({8, 1024, 100}), Error);
  CHECK_THROWS_AS(validate_ldca_config({0, 1024, 8192}), Error);
  CHECK_THROWS_AS(validate_ldca_config({8, 0, 8192}), Error);
  CHECK_THROWS_AS(validate_ldca_config({240, 1, 8}), Error);
  CHECK_THROWS_AS(LdcaSketch(c, SeedSet(1, 3)), Error);

  LdcaSketch s({3, 10, 64}, SeedSet(1, 3));
  CHECK(s.bits().size() == 3u * 10 * 64);
  CHECK(s.counter_offset(2, 9) == (2u * 10 + 9) * 64);
  CHECK(s.column_of(123, 2) < 10);
  CHECK_THROWS_AS(s.column_of(123, 3), Error);
}

TEST_CASE("ldca estimate is the AND across the host's counters") {
  LdcaSketch s({4, 64, 1024}, SeedSet(9, 4));
  for (std::uint32_t oip = 0; oip < 300; ++oip) s.update(42, oip);
  const auto u = s.union_counter(42);
  CHECK(u.count() > 0);
  CHECK(s.estimate(42).value == doctest::Approx(ldc_estimate(1024 - u.count(), 1024).value));
  // with a single writer every row holds the same bits
  std::vector<std::size_t> pos(4);
  s.positions(42, 7, pos);
  for (unsigned row = 1; row < 4; ++row)
    CHECK(pos[row] % 1024 == pos[0] % 1024);
  CHECK(s.estimate(42).value == doctest::Approx(300).epsilon(0.1));
  CHECK(s.estimate(43).value == 0.0);
}

TEST_CASE("union counter fill matches psu (small Monte Carlo)") {
  const std::uint32_t k = 1024, lc = 64;
  const double n = 30000;
  for (std::uint32_t lr : {1u, 2u, 3u}) {
    LdcaSketch s({lr, lc, k}, SeedSet(lr, lr));
    for (const auto& p : test::random_pairs(static_cast<std::size_t>(n), 100 + lr)) s.update(p.hip, p.oip);
    double fill = 0;
    constexpr int probes = 400;
    std::mt19937_64 rng(lr);
    for (int i = 0; i < probes; ++i)
      fill += static_cast<double>(s.union_counter(static_cast<std::uint32_t>(rng())).count()) / k;
    CHECK(fill / probes == doctest::Approx(psu(k, n, lc, lr)).epsilon(0.05));
  }
}

TEST_CASE("ldca shards merge exactly; mismatches are rejected") {
  const LdcaConfig c{4, 32, 512};
  const auto pairs = test::random_pairs(20000, 4);
  LdcaSketch whole(c, SeedSet(5, 4)), a(c, SeedSet(5, 4)), b(c, SeedSet(5, 4));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    whole.update(pairs[i].hip, pairs[i].oip);
    (i % 3 ? a : b).update(pairs[i].hip, pairs[i].oip);
  }
  LdcaSketch ab = a, ba = b;
  ab.merge(b);
  ba.merge(a);
  CHECK(ab == whole);
  CHECK(ba == whole);
  CHECK_THROWS_AS(ab.merge(LdcaSketch(c, SeedSet(6, 4))), Error);
  CHECK_THROWS_AS(ab.merge(LdcaSketch({4, 16, 512}, SeedSet(5, 4))), Error);
}
