#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sspd/long_sketch.hpp"
#include "sspd/short_sketch.hpp"
#include "sspd/types.hpp"

namespace sspd {

inline constexpr double kDefaultBeta = 0.8;

struct DetectorConfig {
  SeavConfig seav = make_seav_config(4, 4, 2, 1024);
  LdcaConfig ldca;
  std::uint64_t master_seed = kDefaultMasterSeed;
  double beta = kDefaultBeta;               // filter slack: keep est >= beta * theta
  std::size_t restore_cap = kDefaultRestoreCap;

  SeedSet seeds() const { return SeedSet(master_seed, ldca.rows); }
  std::uint32_t theta() const noexcept { return seav.theta; }

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

void validate_detector_config(const DetectorConfig& config);

struct FinalizeResult {
  std::vector<DetectionReport> reports;  // sorted by ip
  std::vector<std::uint32_t> overflowed;  // arrays skipped by the restore cap
};

/// Restore candidates from `seav`, estimate each against `ldca`, keep those
/// saturated or at least beta * theta.
FinalizeResult detect(const SeavSketch& seav, const LdcaSketch& ldca, double beta,
                      std::uint64_t window_id, ReportSource source,
                      std::size_t restore_cap = kDefaultRestoreCap, unsigned threads = 1);

// One discrete time window: a short estimator vector for candidates plus a
// long estimator array for filtering.
class WindowDetector {
 public:
  explicit WindowDetector(DetectorConfig config = {}, std::uint64_t window_id = 0);

  const DetectorConfig& config() const noexcept { return config_; }
  std::uint64_t window_id() const noexcept { return window_id_; }
  std::uint64_t pair_count() const noexcept { return pair_count_; }

  /// Integer-only; safe to call from concurrent scanners.
  void process_pair(std::uint32_t hip, std::uint32_t oip) noexcept;
  /// Scans `pairs` with up to `threads` concurrent scanners.
  void process_batch(std::span<const IpPair> pairs, unsigned threads = 1);

  /// Requires quiescence.
  FinalizeResult finalize(unsigned threads = 1) const;
  FinalizeResult finalize(double beta, unsigned threads = 1) const;

  /// Zero all registers and move to the next window.
  void reset() noexcept;

  /// OR-merges another detector of the same window and configuration.
  void merge(const WindowDetector& other);

  const SeavSketch& seav() const noexcept { return seav_; }
  const LdcaSketch& ldca() const noexcept { return ldca_; }
  SeavSketch& seav() noexcept { return seav_; }
  LdcaSketch& ldca() noexcept { return ldca_; }

  std::size_t memory_bytes() const noexcept { return seav_.memory_bytes() + ldca_.memory_bytes(); }

 private:
  DetectorConfig config_;
  SeavSketch seav_;
  LdcaSketch ldca_;
  std::uint64_t window_id_;
  std::uint64_t pair_count_ = 0;
};

}  // namespace sspd
