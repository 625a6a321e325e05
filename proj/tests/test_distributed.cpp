#include <doctest.h>

#include <filesystem>
#include <vector>

#include "sspd/distributed.hpp"
#include "sspd/error.hpp"
#include "support.hpp"

using namespace sspd;

namespace {

ErrorCode decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    deserialize_frame(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("frame decoded without error");
  return ErrorCode::invalid_argument;
}

WindowDetector loaded(std::uint64_t window_id = 3) {
  WindowDetector det(test::small_config(), window_id);
  det.process_batch(test::mixed_traffic(4, 1500, 10000, 12));
  return det;
}

}  // namespace

TEST_CASE("config block round trip") {
  auto config = test::small_config(777);
  config.master_seed = 0x0123456789ABCDEFULL;
  const auto block = encode_config_block(config);
  CHECK(block.size() == 29);
  CHECK(block[0] == 3);  // r
  CHECK(block[1] == 4);  // rows
  CHECK(block[2] == 2);  // overlap
  CHECK(block[3] == 8);  // g
  CHECK(block[4] == (777 & 0xFF));
  CHECK(block[5] == (777 >> 8));
  CHECK(block[20] == 0xEF);  // seed, little-endian
  CHECK(block[28] == 32);    // address bits
  const auto back = decode_config_block(block);
  CHECK(back.seav == config.seav);
  CHECK(back.ldca == config.ldca);
  CHECK(back.master_seed == config.master_seed);
}

TEST_CASE("frame layout and round trip") {
  const auto det = loaded();
  for (auto kind : {FrameKind::seav, FrameKind::ldca}) {
    const auto bytes = serialize_frame(det, kind);
    CHECK(bytes.size() == frame_size(det.config(), kind));
    CHECK(bytes[0] == 'S');
    CHECK(bytes[3] == 'D');
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == static_cast<std::uint8_t>(kind));
    CHECK(bytes[35] == 3);  // window id
    const auto frame = deserialize_frame(bytes);
    CHECK(frame.kind == kind);
    CHECK(frame.window_id == 3);
    CHECK(frame.config.seav == det.config().seav);
    CHECK(frame.payload == (kind == FrameKind::seav ? det.seav().bits() : det.ldca().bits()));
  }
  CHECK(frame_size(DetectorConfig{}, FrameKind::seav) == 43 + 32768 + 4);
  CHECK(frame_size(DetectorConfig{}, FrameKind::ldca) == 43 + 8u * 1024 * 8192 / 8 + 4);
}

TEST_CASE("corrupted frames fail with distinct errors") {
  const auto good = serialize_frame(loaded(), FrameKind::seav);

  auto bytes = good;
  bytes[0] = 'X';
  CHECK(decode_error(bytes) == ErrorCode::bad_magic);

  bytes = good;
  bytes[4] = 2;
  CHECK(decode_error(bytes) == ErrorCode::bad_version);

  bytes = good;
  bytes[5] = 9;
  CHECK(decode_error(bytes) == ErrorCode::parse);

  bytes = good;
  bytes[100] ^= 0x10;
  CHECK(decode_error(bytes) == ErrorCode::bad_checksum);

  bytes = good;
  bytes[7] ^= 0xFF;  // config block: rows
  CHECK(decode_error(bytes) == ErrorCode::bad_checksum);

  bytes = good;
  bytes.resize(bytes.size() - 1);
  CHECK(decode_error(bytes) == ErrorCode::truncated);

  bytes = std::vector<std::uint8_t>(good.begin(), good.begin() + 20);
  CHECK(decode_error(bytes) == ErrorCode::truncated);

  bytes = good;
  bytes.push_back(0);
  CHECK(decode_error(bytes) == ErrorCode::parse);

  CHECK(decode_error({}) == ErrorCode::bad_magic);
}

TEST_CASE("merging frames rebuilds the detector; incompatible sets are refused") {
  const auto a = loaded(3);
  WindowDetector b(test::small_config(), 3);
  b.process_batch(test::mixed_traffic(2, 1200, 5000, 77));
  std::vector<SketchFrame> frames;
  for (const WindowDetector* d : {&a, static_cast<const WindowDetector*>(&b)})
    for (auto kind : {FrameKind::seav, FrameKind::ldca})
      frames.push_back(deserialize_frame(serialize_frame(*d, kind)));
  const auto merged = merge_frames(frames);
  WindowDetector expected = a;
  expected.merge(b);
  CHECK(merged.seav() == expected.seav());
  CHECK(merged.ldca() == expected.ldca());
  CHECK(merged.window_id() == 3);

  auto only_seav = std::vector<SketchFrame>{frames[0], frames[2]};
  CHECK_THROWS_WITH_AS(merge_frames(only_seav), doctest::Contains("LDCA"), Error);
  CHECK_THROWS_AS(merge_frames({}), Error);

  auto other_window = frames;
  other_window.push_back(deserialize_frame(serialize_frame(loaded(4), FrameKind::seav)));
  try {
    merge_frames(other_window);
    FAIL("expected window mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::window_mismatch);
  }

  auto seeded = test::small_config();
  seeded.master_seed = 5;
  auto mixed = frames;
  mixed.push_back(deserialize_frame(serialize_frame(WindowDetector(seeded, 3), FrameKind::ldca)));
  try {
    merge_frames(mixed);
    FAIL("expected incompatible configs");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::merge_incompatible);
  }
}

TEST_CASE("routing") {
  const IpPair p{1, 2};
  CHECK(route_pair(p, 10, 4, Route::round_robin) == 2);
  CHECK(route_pair(p, 0, 4, Route::hash) == route_pair(p, 99, 4, Route::hash));
  CHECK(route_pair(p, 0, 1, Route::hash) == 0);
  CHECK_THROWS_AS(route_pair(p, 0, 0, Route::hash), Error);

  std::vector<int> load(8);
  for (const auto& q : test::random_pairs(80000, 3)) ++load[route_pair(q, 0, 8, Route::hash)];
  for (int l : load) CHECK(l == doctest::Approx(10000).epsilon(0.05));
}

TEST_CASE("watch points scan in buffered batches") {
  WatchPoint wp(0, test::small_config(), 1, 1000);
  for (const auto& p : test::random_pairs(2500, 1)) wp.push(p);
  CHECK(wp.batches() == 2);
  const auto frames = wp.end_window();
  CHECK(wp.batches() == 3);
  CHECK(wp.detector().pair_count() == 2500);
  REQUIRE(frames.size() == 2);
  CHECK(deserialize_frame(frames[0]).kind == FrameKind::seav);
  CHECK(deserialize_frame(frames[1]).kind == FrameKind::ldca);
  CHECK_THROWS_AS(WatchPoint(0, test::small_config(), 1, 0), Error);
}

TEST_CASE("any topology reproduces the single-node sketches and reports") {
  const auto config = test::small_config();
  const auto pairs = test::mixed_traffic(12, 1500, 40000, 31);
  WindowDetector single(config, 9);
  single.process_batch(pairs);
  const auto expected = single.finalize();
  for (unsigned n : {1u, 4u, 16u}) {
    for (auto route : {Route::hash, Route::round_robin}) {
      CAPTURE(n);
      TopologyOptions options;
      options.watch_points = n;
      options.route = route;
      options.buffer_pairs = 4096;
      options.threads = 4;
      const auto out = simulate_window(config, pairs, 9, options);
      CHECK(out.global.seav() == single.seav());
      CHECK(out.global.ldca() == single.ldca());
      CHECK(out.result.reports == expected.reports);
      CHECK(out.frame_bytes == n * (frame_size(config, FrameKind::seav) + frame_size(config, FrameKind::ldca)));
    }
  }
}

TEST_CASE("frames round-trip through files") {
  const auto dir = std::filesystem::temp_directory_path() / "sspd_test_frames";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  CHECK(frame_file_name(3, 7, FrameKind::seav) == "wp3_win7_seav.sspd");
  CHECK(frame_file_name(0, 12, FrameKind::ldca) == "wp0_win12_ldca.sspd");

  TopologyOptions options;
  options.watch_points = 2;
  options.frame_dir = dir;
  const auto pairs = test::mixed_traffic(3, 1500, 3000, 5);
  const auto out = simulate_window(test::small_config(), pairs, 12, options);
  REQUIRE(out.frame_files.size() == 4);
  CHECK(out.frame_files[0].filename() == "wp0_win12_seav.sspd");
  for (const auto& f : out.frame_files) CHECK(std::filesystem::file_size(f) > kFrameHeaderSize);
  CHECK_THROWS_AS(read_frame_file(dir / "missing.sspd"), Error);
  std::filesystem::remove_all(dir);
}
