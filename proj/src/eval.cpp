#include "sspd/eval.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "sspd/error.hpp"

namespace sspd {

void ExactOracle::add(std::span<const IpPair> pairs) {
  for (const auto& p : pairs) add(p.hip, p.oip);
}

std::uint64_t ExactOracle::cardinality(std::uint32_t hip) const {
  const auto it = hosts_.find(hip);
  return it == hosts_.end() ? 0 : it->second.size();
}

std::vector<std::uint32_t> ExactOracle::superpoints(std::uint64_t theta) const {
  std::vector<std::uint32_t> out;
  for (const auto& [ip, opposite] : hosts_) {
    if (opposite.size() >= theta) out.push_back(ip);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<HostCardinality> ExactOracle::cardinalities() const {
  std::vector<HostCardinality> out;
  out.reserve(hosts_.size());
  for (const auto& [ip, opposite] : hosts_) out.push_back({ip, opposite.size()});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.ip < b.ip; });
  return out;
}

std::vector<HostCardinality> exact_cardinalities(std::span<const IpPair> pairs) {
  std::vector<std::uint64_t> keys;
  keys.reserve(pairs.size());
  for (const auto& p : pairs) keys.push_back((std::uint64_t{p.hip} << 32) | p.oip);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<HostCardinality> out;
  for (auto key : keys) {
    const auto hip = static_cast<std::uint32_t>(key >> 32);
    if (out.empty() || out.back().ip != hip) out.push_back({hip, 0});
    ++out.back().cardinality;
  }
  return out;
}

std::vector<std::uint32_t> superpoints_of(std::span<const HostCardinality> hosts,
                                          std::uint64_t theta) {
  std::vector<std::uint32_t> out;
  for (const auto& h : hosts) {
    if (h.cardinality >= theta) out.push_back(h.ip);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Metrics compute_metrics(std::span<const std::uint32_t> detected,
                        std::span<const std::uint32_t> truth) {
  std::vector<std::uint32_t> d(detected.begin(), detected.end());
  std::vector<std::uint32_t> t(truth.begin(), truth.end());
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  if (t.empty()) fail(ErrorCode::undefined_metric, "no true super points: rates are undefined");

  std::vector<std::uint32_t> fp;
  std::vector<std::uint32_t> fn;
  std::set_difference(d.begin(), d.end(), t.begin(), t.end(), std::back_inserter(fp));
  std::set_difference(t.begin(), t.end(), d.begin(), d.end(), std::back_inserter(fn));

  Metrics m;
  m.detected = d.size();
  m.truth = t.size();
  m.false_positives = fp.size();
  m.false_negatives = fn.size();
  const double n = static_cast<double>(t.size());
  m.fpr = static_cast<double>(fp.size()) / n;
  m.fnr = static_cast<double>(fn.size()) / n;
  m.ftr = m.fpr + m.fnr;
  m.precision = d.empty() ? 1.0
                          : static_cast<double>(d.size() - fp.size()) / static_cast<double>(d.size());
  return m;
}

namespace {

void check_range(const CardinalityRange& r, const char* what) {
  if (r.min < 1 || r.min > r.max) {
    fail(ErrorCode::invalid_argument, std::string(what) + " cardinality range must satisfy 1 <= min <= max");
  }
}

}  // namespace

GeneratedTrace generate_trace(const TraceSpec& spec) {
  if (spec.n_super > 0) check_range(spec.super_cardinality, "super");
  if (spec.n_background > 0) check_range(spec.background_cardinality, "background");
  if (spec.slices == 0) fail(ErrorCode::invalid_argument, "trace needs at least one slice");

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::uint32_t> any_ip;

  const std::size_t hosts = std::size_t{spec.n_super} + spec.n_background;
  std::unordered_set<std::uint32_t> used;
  std::vector<std::uint32_t> host_ips;
  host_ips.reserve(hosts);
  while (host_ips.size() < hosts) {
    const std::uint32_t ip = any_ip(rng);
    if (used.insert(ip).second) host_ips.push_back(ip);
  }

  GeneratedTrace out;
  std::vector<IpPair> distinct;
  for (std::size_t h = 0; h < hosts; ++h) {
    const bool super = h < spec.n_super;
    const CardinalityRange& range = super ? spec.super_cardinality : spec.background_cardinality;
    const std::uint32_t card =
        std::uniform_int_distribution<std::uint32_t>(range.min, range.max)(rng);
    std::unordered_set<std::uint32_t> opposite;
    opposite.reserve(card);
    while (opposite.size() < card) {
      const std::uint32_t oip = any_ip(rng);
      if (opposite.insert(oip).second) distinct.push_back({host_ips[h], oip});
    }
    if (super) out.planted.push_back({host_ips[h], card});
  }
  std::sort(out.planted.begin(), out.planted.end(),
            [](const auto& a, const auto& b) { return a.ip < b.ip; });

  if (spec.n_pairs < distinct.size()) {
    fail(ErrorCode::invalid_argument, "n_pairs " + std::to_string(spec.n_pairs) +
                                          " is below the " + std::to_string(distinct.size()) +
                                          " distinct pairs the spec plants");
  }
  std::vector<IpPair> pairs = distinct;
  pairs.reserve(spec.n_pairs);
  if (!distinct.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, distinct.size() - 1);
    while (pairs.size() < spec.n_pairs) pairs.push_back(distinct[pick(rng)]);
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);

  std::uniform_int_distribution<std::uint32_t> any_slice(0, spec.slices - 1);
  out.records.reserve(pairs.size());
  for (const auto& p : pairs) out.records.push_back({any_slice(rng), p.hip, p.oip});
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const auto& a, const auto& b) { return a.slice < b.slice; });
  return out;
}

void write_trace_binary(const std::filesystem::path& path, std::span<const TraceRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
  std::vector<char> buf;
  buf.reserve(records.size() * 12);
  const auto put = [&buf](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  for (const auto& r : records) {
    put(r.slice);
    put(r.hip);
    put(r.oip);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

void write_trace_text(const std::filesystem::path& path, std::span<const TraceRecord> records,
                      const std::string& header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out << header;
  for (const auto& r : records) {
    out << r.slice << ',' << format_ipv4(r.hip) << ',' << format_ipv4(r.oip) << '\n';
  }
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

namespace {

std::vector<TraceRecord> read_trace_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string slice, src, dst;
    TraceRecord r;
    if (!std::getline(fields, slice, ',') || !std::getline(fields, src, ',') ||
        !std::getline(fields, dst) || !parse_ipv4(slice, r.slice) || !parse_ipv4(src, r.hip) ||
        !parse_ipv4(dst, r.oip) || slice.find('.') != std::string::npos) {
      fail(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) +
                                 ": expected `slice,src,dst`");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace

std::vector<TraceRecord> read_trace(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".txt" || ext == ".csv") return read_trace_text(path);

  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  if (bytes.size() % 12 != 0) {
    fail(ErrorCode::truncated, path.string() + ": size " + std::to_string(bytes.size()) +
                                   " is not a multiple of 12-byte records");
  }
  std::vector<TraceRecord> out(bytes.size() / 12);
  const auto get = [&bytes](std::size_t pos) {
    return std::uint32_t{bytes[pos]} | std::uint32_t{bytes[pos + 1]} << 8 |
           std::uint32_t{bytes[pos + 2]} << 16 | std::uint32_t{bytes[pos + 3]} << 24;
  };
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {get(12 * i), get(12 * i + 4), get(12 * i + 8)};
  }
  return out;
}

std::vector<WindowPairs> split_windows(std::span<const TraceRecord> records,
                                       std::uint32_t window_slices) {
  if (window_slices == 0) fail(ErrorCode::invalid_argument, "window must span >= 1 slice");
  std::unordered_map<std::uint64_t, std::vector<IpPair>> by_window;
  for (const auto& r : records) by_window[window_of(r, window_slices)].push_back(r.pair());
  std::vector<WindowPairs> out;
  out.reserve(by_window.size());
  for (auto& [id, pairs] : by_window) out.push_back({id, std::move(pairs)});
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.window_id < b.window_id; });
  return out;
}

std::vector<WindowTruth> window_truth(std::span<const TraceRecord> records,
                                      std::uint32_t window_slices) {
  std::vector<WindowTruth> out;
  for (const auto& w : split_windows(records, window_slices)) {
    out.push_back({w.window_id, exact_cardinalities(w.pairs)});
  }
  return out;
}

void write_truth(const std::filesystem::path& path, std::span<const WindowTruth> windows,
                 const std::string& header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out << header;
  for (const auto& w : windows) {
    out << "# window " << w.window_id << '\n';
    for (const auto& h : w.hosts) out << format_ipv4(h.ip) << ' ' << h.cardinality << '\n';
  }
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

std::vector<WindowTruth> read_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::vector<WindowTruth> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream marker(line.substr(1));
      std::string word;
      std::uint64_t id = 0;
      if (marker >> word && word == "window" && marker >> id) out.push_back({id, {}});
      continue;
    }
    std::istringstream fields(line);
    std::string ip_text;
    HostCardinality h;
    if (!(fields >> ip_text >> h.cardinality) || !parse_ipv4(ip_text, h.ip)) {
      fail(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) +
                                 ": expected `ip cardinality`");
    }
    if (out.empty()) out.push_back({0, {}});
    out.back().hosts.push_back(h);
  }
  for (auto& w : out) {
    std::sort(w.hosts.begin(), w.hosts.end(),
              [](const auto& a, const auto& b) { return a.ip < b.ip; });
  }
  return out;
}

}  // namespace sspd
