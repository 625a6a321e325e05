#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sspd/bit_array.hpp"
#include "sspd/hashing.hpp"

namespace sspd {

/// Smallest tau >= 0 with g * 2^tau >= theta, i.e. ceil(log2(theta / g))
/// floored at zero, computed without floating point.
unsigned tau_from_theta(std::uint64_t theta, unsigned g);

// A g-bit short register. A host is judged to reach the threshold once at
// least three of its bits are set.
class ShortEstimator {
 public:
  static constexpr unsigned kHotWeight = 3;

  explicit ShortEstimator(unsigned width = 8, std::uint64_t bits = 0);

  unsigned width() const noexcept { return width_; }
  std::uint64_t bits() const noexcept { return bits_; }
  unsigned weight() const noexcept;
  bool is_hot() const noexcept { return weight() >= kHotWeight; }

  void set(unsigned bit);

  friend bool operator==(const ShortEstimator&, const ShortEstimator&) = default;

 private:
  std::uint64_t bits_;
  unsigned width_;
};

ShortEstimator se_and(const ShortEstimator& x, const ShortEstimator& y);
ShortEstimator se_or(const ShortEstimator& x, const ShortEstimator& y);

/// Records `oip` if its sampled hash clears `tau`. Idempotent per oip.
ShortEstimator se_update(ShortEstimator se, std::uint32_t oip, unsigned tau,
                         const SeedSet& seeds);

// Layout of one short estimator array and the vector of 2^r of them.
//
// A host address splits into RP (low r bits, picks the array) and LP (the
// remaining address_bits - r bits). Row i of an array indexes its registers
// with index_bits[i] consecutive LP bits starting at index_start[i], wrapping
// modulo the LP width. Consecutive rows (cyclically) share `overlap` bits so
// restore can reject inconsistent index combinations early.
struct SeavConfig {
  unsigned r = 4;
  unsigned rows = 4;
  unsigned overlap = 2;
  unsigned g = 8;
  unsigned address_bits = 32;
  std::uint32_t theta = 1024;
  unsigned tau = 7;
  std::vector<unsigned> index_start;
  std::vector<unsigned> index_bits;
  std::vector<std::uint32_t> row_width;

  unsigned lp_bits() const noexcept { return address_bits - r; }
  std::uint32_t array_count() const noexcept { return std::uint32_t{1} << r; }
  std::size_t registers_per_array() const noexcept;
  std::size_t register_count() const noexcept { return registers_per_array() * array_count(); }
  std::size_t memory_bytes() const noexcept { return register_count() * g / 8; }

  friend bool operator==(const SeavConfig&, const SeavConfig&) = default;
};

inline constexpr unsigned kMaxIndexBits = 24;
inline constexpr unsigned kMaxRows = 32;

/// Builds the row layout: with c = ceil(lp_bits / rows), row i starts at i*c
/// and spans c + overlap bits. Throws config_invalid naming the violated
/// constraint when the layout cannot cover or chain the LP bits.
SeavConfig make_seav_config(unsigned r, unsigned rows, unsigned overlap, std::uint32_t theta,
                            unsigned g = 8, unsigned address_bits = 32);

/// Re-checks coverage and overlap constraints of an arbitrary layout.
void validate_seav_config(const SeavConfig& config);

/// Column of `lp` in `row`: bit j of the result is LP bit (start + j) mod lp_bits.
std::uint32_t index_of(const SeavConfig& config, unsigned row, std::uint32_t lp);

/// Inverse of index_of over all rows. Later rows overwrite shared positions;
/// use lp_from_indices_checked() to detect disagreement.
std::uint32_t lp_from_indices(const SeavConfig& config, std::span<const std::uint32_t> indices);
bool lp_from_indices_checked(const SeavConfig& config, std::span<const std::uint32_t> indices,
                             std::uint32_t& lp);

struct CandidateHost {
  std::uint32_t ip = 0;
  std::uint32_t source_sea = 0;
  unsigned union_weight = 0;

  friend bool operator==(const CandidateHost&, const CandidateHost&) = default;
};

struct RestoreResult {
  std::vector<CandidateHost> candidates;  // sorted by ip, unique
  std::vector<std::uint32_t> overflowed;  // RPs whose enumeration hit the cap
};

inline constexpr std::size_t kDefaultRestoreCap = std::size_t{1} << 20;

class SeavSketch {
 public:
  SeavSketch() = default;
  SeavSketch(SeavConfig config, SeedSet seeds);

  const SeavConfig& config() const noexcept { return config_; }
  const SeedSet& seeds() const noexcept { return seeds_; }

  /// Bit offsets (into bits()) that (hip, oip) sets. Writes config().rows
  /// positions and returns that count, or 0 when oip is not sampled.
  std::size_t positions(std::uint32_t hip, std::uint32_t oip,
                        std::span<std::size_t> out) const noexcept;

  /// Safe to call from concurrent scanners.
  void update(std::uint32_t hip, std::uint32_t oip) noexcept;

  std::size_t register_index(std::uint32_t rp, unsigned row, std::uint32_t column) const noexcept {
    return rp * array_registers_ + row_offset_[row] + column;
  }
  ShortEstimator estimator(std::uint32_t rp, unsigned row, std::uint32_t column) const;

  /// Candidate super points. `threads` > 1 restores different arrays in parallel.
  RestoreResult restore(std::size_t cap = kDefaultRestoreCap, unsigned threads = 1) const;

  void merge(const SeavSketch& other);
  void clear() noexcept { bits_.clear(); }

  std::size_t memory_bytes() const noexcept { return config_.memory_bytes(); }
  const BitArray& bits() const noexcept { return bits_; }
  BitArray& bits() noexcept { return bits_; }

  friend bool operator==(const SeavSketch& a, const SeavSketch& b) {
    return a.config_ == b.config_ && a.seeds_ == b.seeds_ && a.bits_ == b.bits_;
  }

 private:
  void restore_array(std::uint32_t rp, std::size_t cap, RestoreResult& out) const;

  SeavConfig config_;
  SeedSet seeds_;
  std::vector<std::size_t> row_offset_;
  std::size_t array_registers_ = 0;
  BitArray bits_;
};

}  // namespace sspd
