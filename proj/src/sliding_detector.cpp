#include "sspd/sliding_detector.hpp"

#include <array>
#include <string>

#include "sspd/error.hpp"

namespace sspd {

TimestampPool::TimestampPool(std::size_t slots, std::uint32_t window_slices)
    : window_(window_slices) {
  if (window_slices == 0 || window_slices > kMaxWindowSlices) {
    fail(ErrorCode::config_invalid, "window slices must be in [1, " +
                                        std::to_string(kMaxWindowSlices) + "]");
  }
  // age == window at slice 0: every slot starts inactive
  stamps_.assign(slots, static_cast<Stamp>(0u - window_slices));
}

void TimestampPool::touch(std::size_t slot, std::uint64_t slice) {
  if (slot >= stamps_.size()) fail(ErrorCode::invalid_argument, "timestamp slot out of range");
  if (slice > now_) {
    fail(ErrorCode::invalid_argument, "cannot touch future slice " + std::to_string(slice) +
                                          " at slice " + std::to_string(now_));
  }
  const std::uint64_t new_age = now_ - slice;
  if (new_age >= window_) return;
  std::atomic_ref<Stamp> stamp(stamps_[slot]);
  Stamp current = stamp.load(std::memory_order_relaxed);
  const auto fresh = static_cast<Stamp>(slice);
  while (age(current) > new_age &&
         !stamp.compare_exchange_weak(current, fresh, std::memory_order_relaxed)) {
  }
}

bool TimestampPool::active(std::size_t slot) const {
  if (slot >= stamps_.size()) fail(ErrorCode::invalid_argument, "timestamp slot out of range");
  return age(stamps_[slot]) < window_;
}

void TimestampPool::advance_slice() noexcept {
  ++now_;
  if (now_ % kSweepPeriod == 0) sweep();
}

void TimestampPool::advance_to(std::uint64_t slice) {
  if (slice < now_) {
    fail(ErrorCode::invalid_argument, "cannot move back from slice " + std::to_string(now_) +
                                          " to " + std::to_string(slice));
  }
  while (now_ < slice) advance_slice();
}

void TimestampPool::sweep() noexcept {
  const auto pinned = static_cast<Stamp>(static_cast<Stamp>(now_) - window_);
  for (auto& s : stamps_) {
    if (age(s) >= window_) s = pinned;
  }
}

void TimestampPool::merge(const TimestampPool& other) {
  if (other.stamps_.size() != stamps_.size() || other.window_ != window_ ||
      other.now_ != now_) {
    fail(ErrorCode::merge_incompatible,
         "timestamp pools differ in size, window length or current slice");
  }
  for (std::size_t i = 0; i < stamps_.size(); ++i) {
    if (age(other.stamps_[i]) < age(stamps_[i])) stamps_[i] = other.stamps_[i];
  }
}

SlidingDetector::SlidingDetector(DetectorConfig config, std::uint32_t window_slices)
    : config_(std::move(config)),
      seav_layout_(config_.seav, config_.seeds()),
      ldca_layout_(config_.ldca, config_.seeds()),
      ldca_base_(seav_layout_.bits().size()),
      pool_(seav_layout_.bits().size() + ldca_layout_.bits().size(), window_slices) {
  validate_detector_config(config_);
}

void SlidingDetector::process_pair_at(std::uint32_t hip, std::uint32_t oip, std::uint64_t slice) {
  std::array<std::size_t, kMaxRows> seav_slots;
  std::vector<std::size_t> ldca_slots(config_.ldca.rows);
  const std::size_t n = seav_layout_.positions(hip, oip, seav_slots);
  for (std::size_t i = 0; i < n; ++i) pool_.touch(seav_slots[i], slice);
  ldca_layout_.positions(hip, oip, ldca_slots);
  for (auto slot : ldca_slots) pool_.touch(ldca_base_ + slot, slice);
}

std::pair<SeavSketch, LdcaSketch> SlidingDetector::materialize() const {
  SeavSketch seav = seav_layout_;
  LdcaSketch ldca = ldca_layout_;
  for (std::size_t i = 0; i < ldca_base_; ++i) {
    if (pool_.active(i)) seav.bits().set(i);
  }
  for (std::size_t i = ldca_base_; i < pool_.size(); ++i) {
    if (pool_.active(i)) ldca.bits().set(i - ldca_base_);
  }
  return {std::move(seav), std::move(ldca)};
}

FinalizeResult SlidingDetector::detect(unsigned threads) const {
  return detect(config_.beta, threads);
}

FinalizeResult SlidingDetector::detect(double beta, unsigned threads) const {
  if (!(beta > 0.0 && beta <= 1.0)) fail(ErrorCode::invalid_argument, "beta must be in (0, 1]");
  const auto [seav, ldca] = materialize();
  return sspd::detect(seav, ldca, beta, pool_.now(), ReportSource::sliding, config_.restore_cap,
                      threads);
}

void SlidingDetector::merge(const SlidingDetector& other) {
  if (other.config_ != config_) {
    fail(ErrorCode::merge_incompatible, "sliding detectors use different configurations");
  }
  pool_.merge(other.pool_);
}

}  // namespace sspd
