#include "sspd/long_sketch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "sspd/error.hpp"

namespace sspd {

Estimate ldc_estimate(std::uint64_t zero_bits, std::uint64_t k) {
  if (k == 0) fail(ErrorCode::invalid_argument, "counter size k must be >= 1");
  if (zero_bits > k) {
    fail(ErrorCode::invalid_argument, "zero count " + std::to_string(zero_bits) +
                                          " exceeds counter size " + std::to_string(k));
  }
  const double kd = static_cast<double>(k);
  if (zero_bits == 0) return {kd * std::log(kd), true};
  return {-kd * std::log(static_cast<double>(zero_bits) / kd), false};
}

Ldc::Ldc(std::uint32_t k) : bits_(k) {
  if (k == 0) fail(ErrorCode::invalid_argument, "counter size k must be >= 1");
}

void validate_ldca_config(const LdcaConfig& c) {
  if (c.k == 0 || c.k % 8 != 0) {
    fail(ErrorCode::config_invalid, "k must be a positive multiple of 8");
  }
  if (c.rows == 0) fail(ErrorCode::config_invalid, "LR must be >= 1");
  if (c.rows > 0xFFu - tag::kRowBase) {
    fail(ErrorCode::config_invalid, "LR must be <= " + std::to_string(0xFFu - tag::kRowBase));
  }
  if (c.columns == 0) fail(ErrorCode::config_invalid, "LC must be >= 1");
  if (c.counter_count() * c.k > (std::uint64_t{1} << 36)) {
    fail(ErrorCode::config_invalid, "long estimator array exceeds 8 GiB");
  }
}

LdcaSketch::LdcaSketch(LdcaConfig config, SeedSet seeds)
    : config_(config), seeds_(std::move(seeds)) {
  validate_ldca_config(config_);
  if (seeds_.rows.size() != config_.rows) {
    fail(ErrorCode::invalid_argument, "seed set must carry one row hash per LDCA row");
  }
  bits_ = BitArray(config_.counter_count() * config_.k);
}

std::uint32_t LdcaSketch::column_of(std::uint32_t hip, std::uint32_t row) const {
  if (row >= config_.rows) fail(ErrorCode::invalid_argument, "LDCA row out of range");
  return hash_range_unchecked(hip, seeds_.rows[row], config_.columns);
}

BitArray LdcaSketch::union_counter(std::uint32_t hip) const {
  BitArray out(config_.k);
  std::vector<std::size_t> offsets;
  for (std::uint32_t row = 0; row < config_.rows; ++row) {
    offsets.push_back(counter_offset(row, column_of(hip, row)));
  }
  for (std::uint32_t bit = 0; bit < config_.k; bit += 64) {
    const unsigned width = std::min<std::uint32_t>(64, config_.k - bit);
    std::uint64_t word = ~std::uint64_t{0};
    for (auto off : offsets) word &= bits_.extract(off + bit, width);
    for (unsigned j = 0; j < width; ++j) {
      if ((word >> j) & 1u) out.set(bit + j);
    }
  }
  return out;
}

Estimate LdcaSketch::estimate(std::uint32_t hip) const {
  std::vector<std::size_t> offsets;
  for (std::uint32_t row = 0; row < config_.rows; ++row) {
    offsets.push_back(counter_offset(row, column_of(hip, row)));
  }
  std::uint64_t ones = 0;
  for (std::uint32_t bit = 0; bit < config_.k; bit += 64) {
    const unsigned width = std::min<std::uint32_t>(64, config_.k - bit);
    std::uint64_t word = ~std::uint64_t{0};
    for (auto off : offsets) word &= bits_.extract(off + bit, width);
    ones += static_cast<std::uint64_t>(std::popcount(word));
  }
  return ldc_estimate(config_.k - ones, config_.k);
}

void LdcaSketch::merge(const LdcaSketch& other) {
  if (other.config_ != config_ || other.seeds_ != seeds_) {
    fail(ErrorCode::merge_incompatible,
         "cannot merge long estimator arrays with different configuration or seeds");
  }
  bits_.or_with(other.bits_);
}

double psu(double k, double n_pairs, double columns, double rows) {
  if (!(k >= 1) || !(n_pairs >= 0) || !(columns > 0) || !(rows > 0)) {
    fail(ErrorCode::invalid_argument, "psu: k >= 1, N >= 0, LC > 0, LR > 0 required");
  }
  // 1 - (1 - 1/k)^(N/LC), evaluated without cancellation
  const double per_row = -std::expm1((n_pairs / columns) * std::log1p(-1.0 / k));
  return std::pow(per_row, rows);
}

RowPlan plan_rows(std::uint64_t counters, double n_pairs, std::uint32_t k,
                  std::uint32_t max_rows) {
  if (counters == 0 || !(n_pairs > 0) || k < 2) {
    fail(ErrorCode::invalid_argument, "plan_rows: V >= 1, N > 0, k >= 2 required");
  }
  const double v = static_cast<double>(counters);
  RowPlan plan;
  plan.optimal_rows = -v * std::log(2.0) / (n_pairs * std::log1p(-1.0 / k));

  // psu is unimodal in LR; take the better integer neighbour of the optimum
  const auto at = [&](double lr) { return psu(k, n_pairs, v / lr, lr); };
  const double lo = std::max(1.0, std::floor(plan.optimal_rows));
  const double hi = std::max(1.0, std::ceil(plan.optimal_rows));
  double best = at(lo) <= at(hi) ? lo : hi;
  if (at(lo) == at(hi)) best = std::max(1.0, std::round(plan.optimal_rows));
  best = std::min(best, static_cast<double>(0xFFu - tag::kRowBase));
  plan.unclamped_rows = static_cast<std::uint32_t>(best);

  plan.rows = plan.unclamped_rows;
  if (max_rows != 0) plan.rows = std::clamp<std::uint32_t>(plan.rows, 1, max_rows);
  plan.rows = static_cast<std::uint32_t>(std::min<std::uint64_t>(plan.rows, counters));
  plan.columns = static_cast<std::uint32_t>(counters / plan.rows);
  plan.psu = psu(k, n_pairs, plan.columns, plan.rows);
  plan.noise = plan.psu * k;
  return plan;
}

}  // namespace sspd
