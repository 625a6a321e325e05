#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "sspd/bit_array.hpp"
#include "sspd/hashing.hpp"

namespace sspd {

struct Estimate {
  double value = 0.0;
  bool saturated = false;
};

/// Linear counting estimate -k * ln(z0 / k). An all-ones register (z0 == 0)
/// returns k * ln(k) with the saturated flag set.
Estimate ldc_estimate(std::uint64_t zero_bits, std::uint64_t k);

// A single k-bit linear distinct counter.
class Ldc {
 public:
  explicit Ldc(std::uint32_t k);

  void update(std::uint32_t oip, const HashSeed& bit_seed) noexcept;
  std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(bits_.size()); }
  std::size_t zero_count() const noexcept { return bits_.size() - bits_.count(); }
  Estimate estimate() const { return ldc_estimate(zero_count(), size()); }
  const BitArray& bits() const noexcept { return bits_; }

 private:
  BitArray bits_;
};

struct LdcaConfig {
  std::uint32_t rows = 8;
  std::uint32_t columns = 1024;
  std::uint32_t k = 8192;

  std::size_t counter_count() const noexcept { return std::size_t{rows} * columns; }
  std::size_t memory_bytes() const noexcept { return counter_count() * k / 8; }

  friend bool operator==(const LdcaConfig&, const LdcaConfig&) = default;
};

void validate_ldca_config(const LdcaConfig& config);

// rows x columns linear counters. A host owns one counter per row (picked by
// that row's hash); its estimate comes from the AND of those counters.
class LdcaSketch {
 public:
  LdcaSketch() = default;
  LdcaSketch(LdcaConfig config, SeedSet seeds);

  const LdcaConfig& config() const noexcept { return config_; }
  const SeedSet& seeds() const noexcept { return seeds_; }

  /// Bit offsets (into bits()) that (hip, oip) sets; writes config().rows entries.
  std::size_t positions(std::uint32_t hip, std::uint32_t oip,
                        std::span<std::size_t> out) const noexcept;

  /// Safe to call from concurrent scanners.
  void update(std::uint32_t hip, std::uint32_t oip) noexcept;

  std::size_t counter_offset(std::uint32_t row, std::uint32_t column) const noexcept {
    return (std::size_t{row} * config_.columns + column) * config_.k;
  }
  std::uint32_t column_of(std::uint32_t hip, std::uint32_t row) const;

  /// The host's union counter (AND over its rows).
  BitArray union_counter(std::uint32_t hip) const;
  Estimate estimate(std::uint32_t hip) const;

  void merge(const LdcaSketch& other);
  void clear() noexcept { bits_.clear(); }

  std::size_t memory_bytes() const noexcept { return config_.memory_bytes(); }
  const BitArray& bits() const noexcept { return bits_; }
  BitArray& bits() noexcept { return bits_; }

  friend bool operator==(const LdcaSketch& a, const LdcaSketch& b) {
    return a.config_ == b.config_ && a.seeds_ == b.seeds_ && a.bits_ == b.bits_;
  }

 private:
  LdcaConfig config_;
  SeedSet seeds_;
  BitArray bits_;
};

/// Probability that a bit of a host's union counter is set when N distinct
/// pairs are spread over `columns` counters per row and `rows` rows.
double psu(double k, double n_pairs, double columns, double rows);

struct RowPlan {
  double optimal_rows = 0;        // continuous optimum of psu for fixed V
  std::uint32_t unclamped_rows = 1;
  std::uint32_t rows = 1;         // after clamping to [1, max_rows]
  std::uint32_t columns = 0;      // floor(V / rows)
  double psu = 0;                 // at (rows, columns)
  double noise = 0;               // psu * k, expected stray bits per union counter

  bool noise_ok() const noexcept { return noise < 1.0; }
};

inline constexpr std::uint32_t kDefaultMaxRows = 8;

/// Splits V counters into rows x columns minimizing psu for N expected
/// distinct pairs. `max_rows == 0` disables the clamp.
RowPlan plan_rows(std::uint64_t counters, double n_pairs, std::uint32_t k,
                  std::uint32_t max_rows = kDefaultMaxRows);

}  // namespace sspd
