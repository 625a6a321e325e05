#include "sspd/window_detector.hpp"

#include <algorithm>
#include <string>

#include "sspd/error.hpp"

namespace sspd {

void validate_detector_config(const DetectorConfig& config) {
  validate_seav_config(config.seav);
  validate_ldca_config(config.ldca);
  if (!(config.beta > 0.0 && config.beta <= 1.0)) {
    fail(ErrorCode::config_invalid, "beta must be in (0, 1]");
  }
  if (config.restore_cap == 0) fail(ErrorCode::config_invalid, "restore cap must be >= 1");
}

FinalizeResult detect(const SeavSketch& seav, const LdcaSketch& ldca, double beta,
                      std::uint64_t window_id, ReportSource source, std::size_t restore_cap,
                      unsigned threads) {
  if (seav.seeds().master != ldca.seeds().master) {
    fail(ErrorCode::invalid_argument, "short and long sketches use different master seeds");
  }
  RestoreResult restored = seav.restore(restore_cap, threads);
  const double threshold = beta * static_cast<double>(seav.config().theta);
  FinalizeResult out;
  out.overflowed = std::move(restored.overflowed);
  for (const auto& candidate : restored.candidates) {
    const Estimate est = ldca.estimate(candidate.ip);
    if (est.saturated || est.value >= threshold) {
      out.reports.push_back({candidate.ip, est.value, est.saturated, window_id, source});
    }
  }
  return out;
}

WindowDetector::WindowDetector(DetectorConfig config, std::uint64_t window_id)
    : config_(std::move(config)), window_id_(window_id) {
  validate_detector_config(config_);
  const SeedSet seeds = config_.seeds();
  seav_ = SeavSketch(config_.seav, seeds);
  ldca_ = LdcaSketch(config_.ldca, seeds);
}

FinalizeResult WindowDetector::finalize(unsigned threads) const {
  return finalize(config_.beta, threads);
}

FinalizeResult WindowDetector::finalize(double beta, unsigned threads) const {
  if (!(beta > 0.0 && beta <= 1.0)) fail(ErrorCode::invalid_argument, "beta must be in (0, 1]");
  return detect(seav_, ldca_, beta, window_id_, ReportSource::discrete, config_.restore_cap,
                threads);
}

void WindowDetector::reset() noexcept {
  seav_.clear();
  ldca_.clear();
  pair_count_ = 0;
  ++window_id_;
}

void WindowDetector::merge(const WindowDetector& other) {
  if (other.window_id_ != window_id_) {
    fail(ErrorCode::window_mismatch, "cannot merge window " + std::to_string(other.window_id_) +
                                         " into window " + std::to_string(window_id_));
  }
  seav_.merge(other.seav_);
  ldca_.merge(other.ldca_);
  pair_count_ += other.pair_count_;
}

}  // namespace sspd
