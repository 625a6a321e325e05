#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sspd/window_detector.hpp"

namespace sspd {

// One last-active-slice timestamp per sketch bit. A slot is active while
// now - timestamp < window_slices. Timestamps are stored modulo 2^16; a sweep
// every kSweepPeriod slices pins expired slots at age == window_slices so the
// wrap can never make them look fresh again.
class TimestampPool {
 public:
  using Stamp = std::uint16_t;
  static constexpr std::uint32_t kMaxWindowSlices = 1u << 14;
  static constexpr std::uint64_t kSweepPeriod = 1u << 15;

  TimestampPool(std::size_t slots, std::uint32_t window_slices);

  std::size_t size() const noexcept { return stamps_.size(); }
  std::uint32_t window_slices() const noexcept { return window_; }
  std::uint64_t now() const noexcept { return now_; }
  std::size_t memory_bytes() const noexcept { return stamps_.size() * sizeof(Stamp); }

  /// Records activity of `slot` at `slice` (<= now). Keeps the newer stamp;
  /// slices already outside the window are ignored.
  void touch(std::size_t slot, std::uint64_t slice);

  /// Scanning-path variant: slot must be valid, records at now(). Safe from
  /// concurrent scanners.
  void touch_now(std::size_t slot) noexcept {
    std::atomic_ref<Stamp> stamp(stamps_[slot]);
    stamp.store(static_cast<Stamp>(now_), std::memory_order_relaxed);
  }

  bool active(std::size_t slot) const;

  /// Moves to the next slice. Expiry is evaluated lazily; the periodic sweep
  /// only runs once every kSweepPeriod slices.
  void advance_slice() noexcept;
  void advance_to(std::uint64_t slice);

  /// Per-slot newest stamp of two pools at the same slice.
  void merge(const TimestampPool& other);

  friend bool operator==(const TimestampPool&, const TimestampPool&) = default;

 private:
  Stamp age(Stamp stamp) const noexcept { return static_cast<Stamp>(static_cast<Stamp>(now_) - stamp); }
  void sweep() noexcept;

  std::vector<Stamp> stamps_;
  std::uint32_t window_;
  std::uint64_t now_ = 0;
};

// Sliding-window detector: the discrete detector's bits replaced by
// timestamp slots, so no per-window reinitialization is needed.
class SlidingDetector {
 public:
  SlidingDetector(DetectorConfig config, std::uint32_t window_slices);

  const DetectorConfig& config() const noexcept { return config_; }
  std::uint64_t now() const noexcept { return pool_.now(); }
  std::uint32_t window_slices() const noexcept { return pool_.window_slices(); }

  /// Records the pair in the current slice. Integer-only; safe from
  /// concurrent scanners.
  void process_pair(std::uint32_t hip, std::uint32_t oip) noexcept;
  void process_batch(std::span<const IpPair> pairs, unsigned threads = 1);
  /// Records the pair at an earlier (or the current) slice.
  void process_pair_at(std::uint32_t hip, std::uint32_t oip, std::uint64_t slice);

  void advance_slice() noexcept { pool_.advance_slice(); }
  void advance_to(std::uint64_t slice) { pool_.advance_to(slice); }

  /// Active-bit view over the slices (now - window_slices, now].
  std::pair<SeavSketch, LdcaSketch> materialize() const;

  /// Requires a quiesced slice boundary. Reports carry window_id = now().
  FinalizeResult detect(unsigned threads = 1) const;
  FinalizeResult detect(double beta, unsigned threads = 1) const;

  void merge(const SlidingDetector& other);

  std::size_t slot_count() const noexcept { return pool_.size(); }
  std::size_t memory_bytes() const noexcept { return pool_.memory_bytes(); }
  const TimestampPool& pool() const noexcept { return pool_; }

 private:
  DetectorConfig config_;
  SeavSketch seav_layout_;
  LdcaSketch ldca_layout_;
  std::size_t ldca_base_;
  TimestampPool pool_;
};

}  // namespace sspd
