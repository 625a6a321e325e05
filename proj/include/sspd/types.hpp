#pragma once

#include <cstdint>
#include <string>

namespace sspd {

struct IpPair {
  std::uint32_t hip = 0;  // monitored host
  std::uint32_t oip = 0;  // opposite host

  friend bool operator==(const IpPair&, const IpPair&) = default;
};

struct TraceRecord {
  std::uint32_t slice = 0;
  std::uint32_t hip = 0;
  std::uint32_t oip = 0;

  IpPair pair() const noexcept { return {hip, oip}; }
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

enum class ReportSource : std::uint8_t { discrete, sliding };

struct DetectionReport {
  std::uint32_t ip = 0;
  double estimated_cardinality = 0.0;
  bool saturated = false;
  std::uint64_t window_id = 0;
  ReportSource source = ReportSource::discrete;

  friend bool operator==(const DetectionReport&, const DetectionReport&) = default;
};

std::string format_ipv4(std::uint32_t ip);
/// Accepts dotted quads and plain unsigned integers.
bool parse_ipv4(const std::string& text, std::uint32_t& ip);

}  // namespace sspd
