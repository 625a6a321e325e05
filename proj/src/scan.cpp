// Per-pair scanning path. This translation unit is compiled with
// -mgeneral-regs-only, so any floating-point operation here is a build error.

#include <algorithm>
#include <array>
#include <atomic>
#include <thread>

#include "sspd/detail/lp_bits.hpp"
#include "sspd/long_sketch.hpp"
#include "sspd/short_sketch.hpp"
#include "sspd/sliding_detector.hpp"
#include "sspd/window_detector.hpp"

namespace sspd {

std::size_t SeavSketch::positions(std::uint32_t hip, std::uint32_t oip,
                                  std::span<std::size_t> out) const noexcept {
  if (lsb(hash_full(oip, seeds_.sample)) < config_.tau) return 0;
  const unsigned bit = hash_range_unchecked(oip, seeds_.slot, config_.g);
  const std::uint32_t rp = hip & static_cast<std::uint32_t>(detail::low_mask(config_.r));
  const unsigned width = config_.lp_bits();
  const std::uint32_t lp = static_cast<std::uint32_t>((hip >> config_.r) & detail::low_mask(width));
  for (unsigned row = 0; row < config_.rows; ++row) {
    const std::uint32_t column =
        detail::extract_wrapped(lp, config_.index_start[row], config_.index_bits[row], width);
    out[row] = register_index(rp, row, column) * config_.g + bit;
  }
  return config_.rows;
}

void SeavSketch::update(std::uint32_t hip, std::uint32_t oip) noexcept {
  std::array<std::size_t, kMaxRows> touched;
  const std::size_t n = positions(hip, oip, touched);
  for (std::size_t i = 0; i < n; ++i) bits_.set_atomic(touched[i]);
}

void Ldc::update(std::uint32_t oip, const HashSeed& bit_seed) noexcept {
  bits_.set_atomic(hash_range_unchecked(oip, bit_seed, bits_.size()));
}

std::size_t LdcaSketch::positions(std::uint32_t hip, std::uint32_t oip,
                                  std::span<std::size_t> out) const noexcept {
  const std::uint32_t bit = hash_range_unchecked(oip, seeds_.ldc_bit, config_.k);
  for (std::uint32_t row = 0; row < config_.rows; ++row) {
    const std::uint32_t column = hash_range_unchecked(hip, seeds_.rows[row], config_.columns);
    out[row] = counter_offset(row, column) + bit;
  }
  return config_.rows;
}

void LdcaSketch::update(std::uint32_t hip, std::uint32_t oip) noexcept {
  const std::uint32_t bit = hash_range_unchecked(oip, seeds_.ldc_bit, config_.k);
  for (std::uint32_t row = 0; row < config_.rows; ++row) {
    const std::uint32_t column = hash_range_unchecked(hip, seeds_.rows[row], config_.columns);
    bits_.set_atomic(counter_offset(row, column) + bit);
  }
}

void WindowDetector::process_pair(std::uint32_t hip, std::uint32_t oip) noexcept {
  seav_.update(hip, oip);
  ldca_.update(hip, oip);
  std::atomic_ref<std::uint64_t>(pair_count_).fetch_add(1, std::memory_order_relaxed);
}

namespace {

template <typename Scan>
void scan_parallel(std::span<const IpPair> pairs, unsigned threads, Scan scan) {
  threads = std::max(1u, threads);
  if (threads == 1 || pairs.size() < 2 * std::size_t{threads}) {
    for (const auto& p : pairs) scan(p);
    return;
  }
  const std::size_t chunk = (pairs.size() + threads - 1) / threads;
  std::vector<std::jthread> scanners;
  for (std::size_t begin = 0; begin < pairs.size(); begin += chunk) {
    const auto part = pairs.subspan(begin, std::min(chunk, pairs.size() - begin));
    scanners.emplace_back([part, &scan] {
      for (const auto& p : part) scan(p);
    });
  }
}

}  // namespace

void WindowDetector::process_batch(std::span<const IpPair> pairs, unsigned threads) {
  scan_parallel(pairs, threads, [this](const IpPair& p) { process_pair(p.hip, p.oip); });
}

void SlidingDetector::process_pair(std::uint32_t hip, std::uint32_t oip) noexcept {
  std::array<std::size_t, kMaxRows> seav_slots;
  const std::size_t n = seav_layout_.positions(hip, oip, seav_slots);
  for (std::size_t i = 0; i < n; ++i) pool_.touch_now(seav_slots[i]);
  const std::uint32_t bit = hash_range_unchecked(oip, ldca_layout_.seeds().ldc_bit, config_.ldca.k);
  for (std::uint32_t row = 0; row < config_.ldca.rows; ++row) {
    const std::uint32_t column =
        hash_range_unchecked(hip, ldca_layout_.seeds().rows[row], config_.ldca.columns);
    pool_.touch_now(ldca_base_ + ldca_layout_.counter_offset(row, column) + bit);
  }
}

void SlidingDetector::process_batch(std::span<const IpPair> pairs, unsigned threads) {
  scan_parallel(pairs, threads, [this](const IpPair& p) { process_pair(p.hip, p.oip); });
}

}  // namespace sspd
