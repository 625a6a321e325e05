#include "sspd/distributed.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <mutex>
#include <thread>

#include "sspd/error.hpp"

namespace sspd {

namespace {

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}
  template <typename T>
  void put(T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i)));
    }
  }

 private:
  std::vector<std::uint8_t>& out_;
};

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t{bytes[pos + i]} << (8 * i);
  pos += sizeof(T);
  return static_cast<T>(v);
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = crc32(crc, bytes.data() + pos, chunk);
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::size_t payload_bits(const DetectorConfig& config, FrameKind kind) {
  return kind == FrameKind::seav ? config.seav.register_count() * config.seav.g
                                 : config.ldca.counter_count() * config.ldca.k;
}

}  // namespace

const char* to_string(FrameKind kind) noexcept {
  return kind == FrameKind::seav ? "seav" : "ldca";
}

std::array<std::uint8_t, kConfigBlockSize> encode_config_block(const DetectorConfig& config) {
  std::vector<std::uint8_t> out;
  Writer w(out);
  w.put(static_cast<std::uint8_t>(config.seav.r));
  w.put(static_cast<std::uint8_t>(config.seav.rows));
  w.put(static_cast<std::uint8_t>(config.seav.overlap));
  w.put(static_cast<std::uint8_t>(config.seav.g));
  w.put(config.seav.theta);
  w.put(config.ldca.k);
  w.put(config.ldca.rows);
  w.put(config.ldca.columns);
  w.put(config.master_seed);
  w.put(static_cast<std::uint8_t>(config.seav.address_bits));
  std::array<std::uint8_t, kConfigBlockSize> block{};
  std::copy(out.begin(), out.end(), block.begin());
  return block;
}

DetectorConfig decode_config_block(std::span<const std::uint8_t, kConfigBlockSize> block) {
  std::span<const std::uint8_t> bytes(block);
  std::size_t pos = 0;
  const auto r = get_le<std::uint8_t>(bytes, pos);
  const auto rows = get_le<std::uint8_t>(bytes, pos);
  const auto overlap = get_le<std::uint8_t>(bytes, pos);
  const auto g = get_le<std::uint8_t>(bytes, pos);
  const auto theta = get_le<std::uint32_t>(bytes, pos);
  DetectorConfig config;
  config.ldca.k = get_le<std::uint32_t>(bytes, pos);
  config.ldca.rows = get_le<std::uint32_t>(bytes, pos);
  config.ldca.columns = get_le<std::uint32_t>(bytes, pos);
  config.master_seed = get_le<std::uint64_t>(bytes, pos);
  const auto address_bits = get_le<std::uint8_t>(bytes, pos);
  config.seav = make_seav_config(r, rows, overlap, theta, g, address_bits);
  validate_detector_config(config);
  return config;
}

std::size_t frame_size(const DetectorConfig& config, FrameKind kind) {
  return kFrameHeaderSize + (payload_bits(config, kind) + 7) / 8 + 4;
}

std::vector<std::uint8_t> serialize_frame(const WindowDetector& detector, FrameKind kind) {
  const DetectorConfig& config = detector.config();
  std::vector<std::uint8_t> out;
  out.reserve(frame_size(config, kind));
  out.insert(out.end(), kFrameMagic.begin(), kFrameMagic.end());
  out.push_back(kFrameVersion);
  out.push_back(static_cast<std::uint8_t>(kind));
  const auto block = encode_config_block(config);
  out.insert(out.end(), block.begin(), block.end());
  Writer(out).put(detector.window_id());
  const auto payload = kind == FrameKind::seav ? detector.seav().bits().to_bytes()
                                               : detector.ldca().bits().to_bytes();
  out.insert(out.end(), payload.begin(), payload.end());
  Writer(out).put(crc32_of(out));
  return out;
}

SketchFrame deserialize_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameMagic.size() ||
      !std::equal(kFrameMagic.begin(), kFrameMagic.end(), bytes.begin())) {
    fail(ErrorCode::bad_magic, "not a sketch frame (bad magic)");
  }
  if (bytes.size() < kFrameHeaderSize + 4) fail(ErrorCode::truncated, "frame header truncated");
  if (bytes[4] != kFrameVersion) {
    fail(ErrorCode::bad_version, "unsupported frame version " + std::to_string(bytes[4]));
  }
  if (bytes[5] > static_cast<std::uint8_t>(FrameKind::ldca)) {
    fail(ErrorCode::parse, "unknown frame kind " + std::to_string(bytes[5]));
  }
  std::size_t tail = bytes.size() - 4;
  const bool crc_ok = get_le<std::uint32_t>(bytes, tail) == crc32_of(bytes.first(bytes.size() - 4));

  SketchFrame frame;
  frame.kind = static_cast<FrameKind>(bytes[5]);
  std::copy_n(bytes.begin() + 6, kConfigBlockSize, frame.config_block.begin());
  try {
    frame.config = decode_config_block(frame.config_block);
  } catch (const Error& e) {
    if (!crc_ok) fail(ErrorCode::bad_checksum, "frame checksum mismatch");
    fail(ErrorCode::parse, std::string("frame config block invalid: ") + e.what());
  }
  const std::size_t expected = frame_size(frame.config, frame.kind);
  if (bytes.size() < expected) {
    fail(ErrorCode::truncated, "frame has " + std::to_string(bytes.size()) + " bytes, expected " +
                                   std::to_string(expected));
  }
  if (bytes.size() > expected) fail(ErrorCode::parse, "trailing bytes after frame");
  if (!crc_ok) fail(ErrorCode::bad_checksum, "frame checksum mismatch");
  std::size_t pos = 6 + kConfigBlockSize;
  frame.window_id = get_le<std::uint64_t>(bytes, pos);
  frame.payload = BitArray::from_bytes(bytes.subspan(kFrameHeaderSize, expected - 4 - kFrameHeaderSize),
                                       payload_bits(frame.config, frame.kind));
  return frame;
}

WindowDetector merge_frames(std::span<const SketchFrame> frames, double beta,
                            std::size_t restore_cap) {
  if (frames.empty()) fail(ErrorCode::missing_kind, "no frames to merge");
  const SketchFrame& first = frames.front();
  bool have_seav = false;
  bool have_ldca = false;
  for (const auto& f : frames) {
    if (f.config_block != first.config_block) {
      fail(ErrorCode::merge_incompatible, "frames carry different configuration blocks");
    }
    if (f.window_id != first.window_id) {
      fail(ErrorCode::window_mismatch, "frames belong to windows " +
                                           std::to_string(first.window_id) + " and " +
                                           std::to_string(f.window_id));
    }
    (f.kind == FrameKind::seav ? have_seav : have_ldca) = true;
  }
  if (!have_seav) fail(ErrorCode::missing_kind, "no SEAV frame in merge set");
  if (!have_ldca) fail(ErrorCode::missing_kind, "no LDCA frame in merge set");

  DetectorConfig config = first.config;
  config.beta = beta;
  config.restore_cap = restore_cap;
  WindowDetector global(config, first.window_id);
  for (const auto& f : frames) {
    BitArray& target = f.kind == FrameKind::seav ? global.seav().bits() : global.ldca().bits();
    target.or_with(f.payload);
  }
  return global;
}

std::string frame_file_name(unsigned watch_point, std::uint64_t window_id, FrameKind kind) {
  return "wp" + std::to_string(watch_point) + "_win" + std::to_string(window_id) + "_" +
         to_string(kind) + ".sspd";
}

void write_frame_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

std::vector<std::uint8_t> read_frame_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

unsigned route_pair(const IpPair& pair, std::size_t index, unsigned watch_points, Route route) {
  if (watch_points == 0) fail(ErrorCode::invalid_argument, "need at least one watch point");
  if (route == Route::round_robin) return static_cast<unsigned>(index % watch_points);
  const std::uint64_t key = (std::uint64_t{pair.hip} << 32) | pair.oip;
  return static_cast<unsigned>(mix64(key ^ 0x726f757465ULL) % watch_points);
}

WatchPoint::WatchPoint(unsigned id, const DetectorConfig& config, std::uint64_t window_id,
                       std::size_t buffer_pairs)
    : id_(id), detector_(config, window_id), capacity_(buffer_pairs) {
  if (buffer_pairs == 0) fail(ErrorCode::invalid_argument, "buffer must hold at least one pair");
  buffer_.reserve(capacity_);
}

void WatchPoint::push(const IpPair& pair) {
  buffer_.push_back(pair);
  if (buffer_.size() == capacity_) flush();
}

void WatchPoint::flush() {
  if (buffer_.empty()) return;
  detector_.process_batch(buffer_);
  buffer_.clear();
  ++batches_;
}

std::vector<std::vector<std::uint8_t>> WatchPoint::end_window() {
  flush();
  return {serialize_frame(detector_, FrameKind::seav), serialize_frame(detector_, FrameKind::ldca)};
}

TopologyWindow simulate_window(const DetectorConfig& config, std::span<const IpPair> pairs,
                               std::uint64_t window_id, const TopologyOptions& options) {
  const unsigned n = options.watch_points;
  if (n == 0) fail(ErrorCode::invalid_argument, "need at least one watch point");

  std::vector<std::vector<IpPair>> shards(n);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    shards[route_pair(pairs[i], i, n, options.route)].push_back(pairs[i]);
  }

  std::vector<std::vector<std::vector<std::uint8_t>>> shipped(n);
  std::mutex error_mutex;
  std::exception_ptr error;
  const unsigned workers = std::clamp(options.threads, 1u, n);
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (unsigned wp = t; wp < n; wp += workers) {
            WatchPoint point(wp, config, window_id, options.buffer_pairs);
            for (const auto& p : shards[wp]) point.push(p);
            shipped[wp] = point.end_window();
          }
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);

  TopologyWindow out;
  std::vector<SketchFrame> frames;
  for (unsigned wp = 0; wp < n; ++wp) {
    const FrameKind kinds[] = {FrameKind::seav, FrameKind::ldca};
    for (std::size_t i = 0; i < shipped[wp].size(); ++i) {
      const auto& bytes = shipped[wp][i];
      out.frame_bytes += bytes.size();
      if (options.frame_dir.empty()) {
        frames.push_back(deserialize_frame(bytes));
        continue;
      }
      auto path = options.frame_dir / frame_file_name(wp, window_id, kinds[i]);
      write_frame_file(path, bytes);
      frames.push_back(deserialize_frame(read_frame_file(path)));
      out.frame_files.push_back(std::move(path));
    }
  }
  out.global = merge_frames(frames, config.beta, config.restore_cap);
  out.result = out.global.finalize(options.threads);
  return out;
}

}  // namespace sspd
