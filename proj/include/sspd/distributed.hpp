#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sspd/window_detector.hpp"

namespace sspd {

// Wire format of one watch point's sketch for one window (little-endian):
//
//   offset  size  field
//   0       4     magic "SSPD"
//   4       1     version (1)
//   5       1     kind (0 = SEAV, 1 = LDCA)
//   6       29    config block: r u8, SR u8, a u8, g u8, theta u32, k u32,
//                 LR u32, LC u32, master seed u64, address bits u8
//   35      8     window id u64
//   43      n     register bytes (bit i -> byte i/8, bit i%8)
//   43+n    4     CRC-32 of all preceding bytes
//
// n is implied by the config block, so every frame of a configuration has
// the same size regardless of traffic.
enum class FrameKind : std::uint8_t { seav = 0, ldca = 1 };

inline constexpr std::array<std::uint8_t, 4> kFrameMagic{'S', 'S', 'P', 'D'};
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kConfigBlockSize = 29;
inline constexpr std::size_t kFrameHeaderSize = 4 + 1 + 1 + kConfigBlockSize + 8;

const char* to_string(FrameKind kind) noexcept;

struct SketchFrame {
  FrameKind kind = FrameKind::seav;
  std::array<std::uint8_t, kConfigBlockSize> config_block{};
  DetectorConfig config;
  std::uint64_t window_id = 0;
  BitArray payload;
};

std::array<std::uint8_t, kConfigBlockSize> encode_config_block(const DetectorConfig& config);
/// Rebuilds the sketch layout from a config block; beta and restore cap keep
/// their defaults since they are local to the global server.
DetectorConfig decode_config_block(std::span<const std::uint8_t, kConfigBlockSize> block);

std::size_t frame_size(const DetectorConfig& config, FrameKind kind);

std::vector<std::uint8_t> serialize_frame(const WindowDetector& detector, FrameKind kind);
SketchFrame deserialize_frame(std::span<const std::uint8_t> bytes);

/// OR-merges every frame into one global detector. All frames must share a
/// config block and window id, and both kinds must be present.
WindowDetector merge_frames(std::span<const SketchFrame> frames, double beta = kDefaultBeta,
                            std::size_t restore_cap = kDefaultRestoreCap);

std::string frame_file_name(unsigned watch_point, std::uint64_t window_id, FrameKind kind);
void write_frame_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_frame_file(const std::filesystem::path& path);

enum class Route { hash, round_robin };

inline constexpr std::size_t kDefaultBufferPairs = std::size_t{64} * 1024;

struct TopologyOptions {
  unsigned watch_points = 1;
  Route route = Route::hash;
  std::size_t buffer_pairs = kDefaultBufferPairs;
  unsigned threads = 1;
  std::filesystem::path frame_dir;  // empty: keep frames in memory only
};

/// Index of the watch point that sees the `index`-th pair of a window.
unsigned route_pair(const IpPair& pair, std::size_t index, unsigned watch_points, Route route);

// A simulated edge scanner. Pairs are buffered and scanned in batches; at
// window end the sketches are shipped as frames.
class WatchPoint {
 public:
  WatchPoint(unsigned id, const DetectorConfig& config, std::uint64_t window_id,
             std::size_t buffer_pairs);

  void push(const IpPair& pair);
  void flush();
  std::vector<std::vector<std::uint8_t>> end_window();

  unsigned id() const noexcept { return id_; }
  std::size_t batches() const noexcept { return batches_; }
  const WindowDetector& detector() const noexcept { return detector_; }

 private:
  unsigned id_;
  WindowDetector detector_;
  std::vector<IpPair> buffer_;
  std::size_t capacity_;
  std::size_t batches_ = 0;
};

struct TopologyWindow {
  FinalizeResult result;
  WindowDetector global;
  std::vector<std::filesystem::path> frame_files;
  std::size_t frame_bytes = 0;  // total bytes shipped to the global server
};

/// Partitions one window's pairs over simulated watch points, scans them
/// concurrently, ships frames and restores on the merged sketches.
TopologyWindow simulate_window(const DetectorConfig& config, std::span<const IpPair> pairs,
                               std::uint64_t window_id, const TopologyOptions& options);

}  // namespace sspd
