#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sspd/types.hpp"

namespace sspd {

struct HostCardinality {
  std::uint32_t ip = 0;
  std::uint64_t cardinality = 0;

  friend bool operator==(const HostCardinality&, const HostCardinality&) = default;
};

// Exact distinct-opposite-IP sets per host.
class ExactOracle {
 public:
  void add(std::uint32_t hip, std::uint32_t oip) { hosts_[hip].insert(oip); }
  void add(std::span<const IpPair> pairs);

  std::size_t host_count() const noexcept { return hosts_.size(); }
  std::uint64_t cardinality(std::uint32_t hip) const;

  /// Hosts with at least theta distinct opposite IPs, sorted.
  std::vector<std::uint32_t> superpoints(std::uint64_t theta) const;
  /// Every host with its exact cardinality, sorted by ip.
  std::vector<HostCardinality> cardinalities() const;

 private:
  std::unordered_map<std::uint32_t, std::unordered_set<std::uint32_t>> hosts_;
};

/// Sort-and-unique route to the same cardinalities, independent of ExactOracle.
std::vector<HostCardinality> exact_cardinalities(std::span<const IpPair> pairs);

std::vector<std::uint32_t> superpoints_of(std::span<const HostCardinality> hosts,
                                          std::uint64_t theta);

// Detection error rates. FPR and FNR are both normalized by the number of
// true super points; FTR is their sum. Precision is the conventional
// TP / detected and is reported separately.
struct Metrics {
  double fpr = 0;
  double fnr = 0;
  double ftr = 0;
  double precision = 0;
  std::size_t detected = 0;
  std::size_t truth = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

/// Throws undefined_metric when `truth` is empty.
Metrics compute_metrics(std::span<const std::uint32_t> detected,
                        std::span<const std::uint32_t> truth);

struct CardinalityRange {
  std::uint32_t min = 1;
  std::uint32_t max = 1;
};

struct TraceSpec {
  std::uint32_t n_super = 50;
  CardinalityRange super_cardinality{2048, 2048};
  std::uint32_t n_background = 100000;
  CardinalityRange background_cardinality{1, 8};
  std::uint64_t n_pairs = 1000000;  // >= total distinct pairs; the rest are repeats
  std::uint32_t slices = 300;
  std::uint64_t seed = 0x5EED;
};

struct GeneratedTrace {
  std::vector<TraceRecord> records;       // ordered by slice
  std::vector<HostCardinality> planted;   // super hosts with their cardinality
};

GeneratedTrace generate_trace(const TraceSpec& spec);

void write_trace_binary(const std::filesystem::path& path, std::span<const TraceRecord> records);
/// `header` is written verbatim first; its lines should start with '#'.
void write_trace_text(const std::filesystem::path& path, std::span<const TraceRecord> records,
                      const std::string& header = {});
/// Text form when the extension is .txt or .csv, 12-byte binary records otherwise.
std::vector<TraceRecord> read_trace(const std::filesystem::path& path);

inline std::uint64_t window_of(const TraceRecord& r, std::uint32_t window_slices) {
  return r.slice / window_slices;
}

struct WindowPairs {
  std::uint64_t window_id = 0;
  std::vector<IpPair> pairs;
};

/// Groups records into consecutive discrete windows, in window order.
std::vector<WindowPairs> split_windows(std::span<const TraceRecord> records,
                                       std::uint32_t window_slices);

struct WindowTruth {
  std::uint64_t window_id = 0;
  std::vector<HostCardinality> hosts;  // sorted by ip
};

std::vector<WindowTruth> window_truth(std::span<const TraceRecord> records,
                                      std::uint32_t window_slices);

/// Sidecar text: `# window <id>` section markers followed by sorted
/// `ip cardinality` lines. Other `#` lines are comments.
void write_truth(const std::filesystem::path& path, std::span<const WindowTruth> windows,
                 const std::string& header = {});
std::vector<WindowTruth> read_truth(const std::filesystem::path& path);

}  // namespace sspd
