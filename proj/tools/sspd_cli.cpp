// sspd: command-line front end over libsspd.

#include <algorithm>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sspd/sspd.h"

namespace {

enum Exit { kOk = 0, kConfigError = 2, kDataError = 3, kInternalError = 4 };

struct CliError {
  int exit_code;
  std::string code;
  std::string message;
};

[[noreturn]] void config_error(const std::string& message) {
  throw CliError{kConfigError, "config_invalid", message};
}

int exit_code_for(sspd_status status) {
  switch (status) {
    case SSPD_ERR_INVALID_ARGUMENT:
    case SSPD_ERR_CONFIG:
      return kConfigError;
    case SSPD_ERR_BUFFER_TOO_SMALL:
    case SSPD_ERR_INTERNAL:
      return kInternalError;
    default:
      return kDataError;
  }
}

void check(sspd_status status) {
  if (status != SSPD_OK)
    throw CliError{exit_code_for(status), sspd_status_name(status), sspd_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Detector = std::unique_ptr<sspd_detector, Deleter<sspd_detector, sspd_detector_free>>;
using Sliding = std::unique_ptr<sspd_sliding, Deleter<sspd_sliding, sspd_sliding_free>>;
using Reports = std::unique_ptr<sspd_reports, Deleter<sspd_reports, sspd_reports_free>>;
using Trace = std::unique_ptr<sspd_trace, Deleter<sspd_trace, sspd_trace_free>>;
using Truth = std::unique_ptr<sspd_truth, Deleter<sspd_truth, sspd_truth_free>>;

std::string format_ipv4(std::uint32_t ip) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", ip >> 24, (ip >> 16) & 0xFF, (ip >> 8) & 0xFF,
                ip & 0xFF);
  return buf;
}

bool parse_ipv4(const std::string& text, std::uint32_t& ip) {
  unsigned a, b, c, d;
  char tail;
  if (std::sscanf(text.c_str(), "%u.%u.%u.%u%c", &a, &b, &c, &d, &tail) == 4) {
    if (a > 255 || b > 255 || c > 255 || d > 255) return false;
    ip = (a << 24) | (b << 16) | (c << 8) | d;
    return true;
  }
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size() || v > 0xFFFFFFFFull) return false;
    ip = static_cast<std::uint32_t>(v);
    return true;
  } catch (...) {
    return false;
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Every flag of every command. Unused fields are still echoed so a header
// fully pins the run.
struct RunConfig {
  std::string command;
  std::uint64_t seed = 0x5EED;
  std::uint32_t theta = 1024;
  double beta = 0.8;
  std::uint32_t r = 4;
  std::uint32_t sr = 4;
  std::uint32_t a = 2;
  std::uint32_t g = 8;
  std::uint32_t address_bits = 32;
  std::uint32_t k = 8192;
  std::uint64_t v = 8192;
  std::uint32_t lr = 0;
  std::uint32_t lc = 0;
  std::uint32_t max_rows = 8;
  double design_n = 1e6;
  std::uint64_t memory_budget = 0;
  std::uint64_t restore_cap = std::uint64_t{1} << 20;
  std::uint32_t window_seconds = 300;
  std::uint32_t slice_seconds = 1;
  std::uint32_t window_slices = 0;
  std::uint32_t detect_every = 1;
  std::uint32_t n_wp = 1;
  std::string route = "hash";
  std::uint64_t buffer = 65536;
  unsigned threads = 1;

  // generate
  std::uint32_t n_super = 50;
  std::uint32_t super_min = 2048, super_max = 2048;
  std::uint32_t n_background = 100000;
  std::uint32_t background_min = 1, background_max = 8;
  std::uint64_t pairs = 1000000;
  std::uint32_t slices = 300;
  std::optional<std::uint64_t> trace_seed;

  // paths
  std::string trace;
  std::string truth;
  std::string reports;
  std::string out = "-";
  std::string frames_dir;
  std::string log;

  // resolved
  sspd_params params{};
  sspd_plan plan{};
  bool planned = false;
  double psu = 0;

  std::uint32_t effective_window_slices() const {
    return window_slices ? window_slices : window_seconds / slice_seconds;
  }
  std::uint64_t effective_trace_seed() const { return trace_seed.value_or(seed); }
};

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%" PRIX64, v);
  return buf;
}

std::string header(const RunConfig& c) {
  std::ostringstream h;
  h << "# sspd " << sspd_version() << ' ' << c.command << '\n';
  h << "# seed=" << hex(c.seed) << " theta=" << c.theta << " beta=" << general(c.beta)
    << " r=" << c.r << " sr=" << c.sr << " a=" << c.a << " g=" << c.g
    << " address_bits=" << c.address_bits << '\n';
  h << "# k=" << c.k << " v=" << c.v << " lr=" << c.params.ldca_rows
    << " lc=" << c.params.ldca_columns << " planned=" << (c.planned ? "yes" : "no")
    << " max_rows=" << c.max_rows << " design_n=" << general(c.design_n)
    << " memory_budget=" << c.memory_budget << " psu=" << general(c.psu)
    << " psu_k=" << general(c.psu * c.k) << '\n';
  h << "# restore_cap=" << c.restore_cap << " window_seconds=" << c.window_seconds
    << " slice_seconds=" << c.slice_seconds << " window_slices=" << c.effective_window_slices()
    << " detect_every=" << c.detect_every << '\n';
  h << "# n_wp=" << c.n_wp << " route=" << c.route << " buffer=" << c.buffer
    << " threads=" << c.threads << '\n';
  h << "# n_super=" << c.n_super << " super_cardinality=" << c.super_min << '-' << c.super_max
    << " n_background=" << c.n_background << " background_cardinality=" << c.background_min
    << '-' << c.background_max << " pairs=" << c.pairs << " slices=" << c.slices
    << " trace_seed=" << hex(c.effective_trace_seed()) << '\n';
  h << "# trace=" << c.trace << " truth=" << c.truth << " reports=" << c.reports
    << " out=" << c.out << " frames_dir=" << c.frames_dir << " log=" << c.log << '\n';
  return h.str();
}

void warn(const std::string& message) { std::cerr << "sspd: warning: " << message << '\n'; }

// Fills params and, unless LR and LC are both given, plans the LDCA split.
void resolve(RunConfig& c) {
  if (c.slice_seconds == 0) config_error("--slice-seconds must be positive");
  if (c.effective_window_slices() == 0) config_error("window spans zero slices");
  if (c.detect_every == 0) config_error("--detect-every must be positive");

  sspd_params_default(&c.params);
  auto& p = c.params;
  p.master_seed = c.seed;
  p.theta = c.theta;
  p.beta = c.beta;
  p.r = c.r;
  p.rows = c.sr;
  p.overlap = c.a;
  p.g = c.g;
  p.address_bits = c.address_bits;
  p.k = c.k;
  p.restore_cap = c.restore_cap;

  if ((c.lr == 0) != (c.lc == 0)) config_error("--lr and --lc must be given together");
  if (c.lr != 0) {
    p.ldca_rows = c.lr;
    p.ldca_columns = c.lc;
  } else {
    if (c.memory_budget != 0) {
      std::uint64_t seav_bytes = 0;
      sspd_params probe = p;
      probe.ldca_rows = 1;
      probe.ldca_columns = 1;
      check(sspd_memory(&probe, &seav_bytes, nullptr));
      if (c.k == 0 || c.memory_budget <= seav_bytes)
        config_error("--memory-budget " + std::to_string(c.memory_budget) +
                     " does not exceed the short sketch's " + std::to_string(seav_bytes) + " bytes");
      c.v = (c.memory_budget - seav_bytes) * 8 / c.k;
      if (c.v == 0) config_error("--memory-budget leaves no room for one long counter");
    }
    check(sspd_plan_rows(c.v, c.design_n, c.k, c.max_rows, &c.plan));
    c.planned = true;
    p.ldca_rows = c.plan.rows;
    p.ldca_columns = c.plan.columns;
  }
  check(sspd_params_validate(&p));
  check(sspd_psu(c.k, c.design_n, p.ldca_columns, p.ldca_rows, &c.psu));
  if (c.psu * c.k >= 1.0)
    warn("expected stray bits per union counter Psu*k = " + general(c.psu * c.k) +
         " >= 1 at design N " + general(c.design_n) + "; estimates will be inflated");
}

class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path != "-") {
      file_.open(path, std::ios::trunc | std::ios::binary);
      if (!file_) throw CliError{kDataError, "io", "cannot open " + path + " for writing"};
    }
  }
  std::ostream& stream() { return path_ == "-" ? std::cout : file_; }
  void close() {
    stream().flush();
    if (!stream()) throw CliError{kDataError, "io", "write failed for " + path_};
  }

 private:
  std::string path_;
  std::ofstream file_;
};

Trace load_trace(const std::string& path) {
  sspd_trace* t = nullptr;
  check(sspd_trace_read(path.c_str(), &t));
  return Trace(t);
}

std::map<std::uint64_t, std::vector<sspd_pair>> split_windows(const sspd_trace* trace,
                                                              std::uint32_t window_slices) {
  std::map<std::uint64_t, std::vector<sspd_pair>> windows;
  const auto* records = sspd_trace_records(trace);
  const auto n = sspd_trace_size(trace);
  for (std::size_t i = 0; i < n; ++i)
    windows[records[i].slice / window_slices].push_back({records[i].hip, records[i].oip});
  return windows;
}

constexpr const char* kReportColumns = "window_id,ip,estimated_cardinality,saturated\n";

std::string report_rows(const sspd_reports* reports) {
  std::string rows;
  const auto n = sspd_reports_count(reports);
  for (std::size_t i = 0; i < n; ++i) {
    sspd_report r;
    check(sspd_reports_get(reports, i, &r));
    rows += std::to_string(r.window_id) + ',' + format_ipv4(r.ip) + ',' +
            fixed(r.estimated_cardinality, 3) + ',' + (r.saturated ? "1" : "0") + '\n';
  }
  return rows;
}

std::string overflow_note(const sspd_reports* reports, std::uint64_t window_id) {
  const auto n = sspd_reports_overflow_count(reports);
  if (n == 0) return {};
  std::string note = "# window " + std::to_string(window_id) + ": restore cap hit in arrays";
  for (std::size_t i = 0; i < n; ++i)
    note += (i ? "," : " ") + std::to_string(sspd_reports_overflow_get(reports, i));
  warn(note.substr(2));
  return note + '\n';
}

int cmd_generate(RunConfig& c) {
  resolve(c);
  if (c.out == "-") config_error("generate needs --out <trace path>");
  sspd_trace_spec spec;
  sspd_trace_spec_default(&spec);
  spec.n_super = c.n_super;
  spec.super_min = c.super_min;
  spec.super_max = c.super_max;
  spec.n_background = c.n_background;
  spec.background_min = c.background_min;
  spec.background_max = c.background_max;
  spec.n_pairs = c.pairs;
  spec.slices = c.slices;
  spec.seed = c.effective_trace_seed();
  sspd_trace* raw = nullptr;
  check(sspd_trace_generate(&spec, &raw));
  Trace trace(raw);

  const auto ext = std::filesystem::path(c.out).extension();
  const bool text = ext == ".txt" || ext == ".csv";
  const auto head = header(c);
  check(sspd_trace_write(trace.get(), c.out.c_str(), text ? 1 : 0, head.c_str()));
  const auto truth = c.truth.empty() ? c.out + ".truth" : c.truth;
  check(sspd_trace_write_truth(trace.get(), c.effective_window_slices(), truth.c_str(),
                               head.c_str()));
  return kOk;
}

int cmd_detect(RunConfig& c) {
  resolve(c);
  auto trace = load_trace(c.trace);
  Output out(c.out);
  out.stream() << header(c) << kReportColumns;
  for (const auto& [window_id, pairs] : split_windows(trace.get(), c.effective_window_slices())) {
    sspd_detector* raw = nullptr;
    check(sspd_detector_create(&c.params, window_id, &raw));
    Detector detector(raw);
    check(sspd_detector_process_batch(detector.get(), pairs.data(), pairs.size(), c.threads));
    sspd_reports* reports_raw = nullptr;
    check(sspd_detector_finalize(detector.get(), c.threads, &reports_raw));
    Reports reports(reports_raw);
    out.stream() << overflow_note(reports.get(), window_id) << report_rows(reports.get());
  }
  out.close();
  return kOk;
}

int cmd_slide(RunConfig& c) {
  resolve(c);
  auto trace = load_trace(c.trace);
  const auto w = c.effective_window_slices();
  const auto* records = sspd_trace_records(trace.get());
  std::vector<sspd_record> sorted(records, records + sspd_trace_size(trace.get()));
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& x, const auto& y) { return x.slice < y.slice; });

  sspd_sliding* raw = nullptr;
  check(sspd_sliding_create(&c.params, w, &raw));
  Sliding sliding(raw);
  Output out(c.out);
  out.stream() << header(c) << kReportColumns;

  std::optional<std::uint64_t> last_active;
  // Detect at every cadence boundary in [from, to); skipped once the window
  // holds no traffic since the report would be empty.
  auto detect_until = [&](std::uint64_t from, std::uint64_t to) {
    if (!last_active) return;
    const std::uint64_t every = c.detect_every;
    for (std::uint64_t t = (from + every) / every * every - 1; t < to; t += every) {
      if (t - *last_active >= w) break;
      check(sspd_sliding_advance_to(sliding.get(), t));
      sspd_reports* reports_raw = nullptr;
      check(sspd_sliding_detect(sliding.get(), c.threads, &reports_raw));
      Reports reports(reports_raw);
      out.stream() << overflow_note(reports.get(), t) << report_rows(reports.get());
    }
  };

  std::uint64_t cursor = 0;
  std::vector<sspd_pair> batch;
  for (std::size_t i = 0; i < sorted.size();) {
    const std::uint64_t slice = sorted[i].slice;
    batch.clear();
    for (; i < sorted.size() && sorted[i].slice == slice; ++i)
      batch.push_back({sorted[i].hip, sorted[i].oip});
    detect_until(cursor, slice);
    check(sspd_sliding_advance_to(sliding.get(), slice));
    check(sspd_sliding_process_batch(sliding.get(), batch.data(), batch.size(), c.threads));
    last_active = slice;
    cursor = slice;
  }
  if (last_active) detect_until(cursor, cursor + 1);
  out.close();
  return kOk;
}

int cmd_distsim(RunConfig& c) {
  resolve(c);
  if (c.n_wp == 0) config_error("--n-wp must be positive");
  auto trace = load_trace(c.trace);
  sspd_topology topology;
  sspd_topology_default(&topology);
  topology.watch_points = c.n_wp;
  topology.route = c.route == "hash" ? SSPD_ROUTE_HASH : SSPD_ROUTE_ROUND_ROBIN;
  topology.buffer_pairs = c.buffer;
  topology.threads = c.threads;
  if (!c.frames_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(c.frames_dir, ec);
    if (ec) throw CliError{kDataError, "io", "cannot create " + c.frames_dir + ": " + ec.message()};
    topology.frame_dir = c.frames_dir.c_str();
  }

  Output out(c.out);
  const auto log_path = !c.log.empty() ? c.log : (c.out == "-" ? std::string("-") : c.out + ".log");
  Output log(log_path);
  out.stream() << header(c) << kReportColumns;
  log.stream() << header(c);

  bool all_identical = true;
  for (const auto& [window_id, pairs] : split_windows(trace.get(), c.effective_window_slices())) {
    sspd_detector* global_raw = nullptr;
    sspd_reports* reports_raw = nullptr;
    std::uint64_t frame_bytes = 0;
    check(sspd_simulate_window(&c.params, pairs.data(), pairs.size(), window_id, &topology,
                               &global_raw, &reports_raw, &frame_bytes));
    Detector global(global_raw);
    Reports reports(reports_raw);

    sspd_detector* single_raw = nullptr;
    check(sspd_detector_create(&c.params, window_id, &single_raw));
    Detector single(single_raw);
    check(sspd_detector_process_batch(single.get(), pairs.data(), pairs.size(), c.threads));
    sspd_reports* single_reports_raw = nullptr;
    check(sspd_detector_finalize(single.get(), c.threads, &single_reports_raw));
    Reports single_reports(single_reports_raw);

    const auto rows = report_rows(reports.get());
    const bool sketches = sspd_detector_equal(global.get(), single.get()) != 0;
    const bool csv = rows == report_rows(single_reports.get());
    all_identical = all_identical && sketches && csv;
    log.stream() << "window=" << window_id << " pairs=" << pairs.size() << " watch_points=" << c.n_wp
                 << " route=" << c.route << " frame_bytes=" << frame_bytes
                 << " sketches_identical=" << (sketches ? "true" : "false")
                 << " reports_identical=" << (csv ? "true" : "false") << '\n';
    out.stream() << overflow_note(reports.get(), window_id) << rows;
  }
  log.stream() << "merge_equivalence=" << (all_identical ? "PASS" : "FAIL") << '\n';
  out.close();
  log.close();
  if (!all_identical)
    throw CliError{kInternalError, "merge_mismatch",
                   "merged sketches differ from the single-node scan; see " + log_path};
  return kOk;
}

std::map<std::uint64_t, std::vector<std::uint32_t>> read_reports(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError{kDataError, "io", "cannot open " + path};
  std::map<std::uint64_t, std::vector<std::uint32_t>> detected;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line.rfind("window_id,", 0) == 0) continue;
    std::istringstream fields(line);
    std::string window, ip;
    std::uint32_t addr = 0;
    std::uint64_t window_id = 0;
    bool ok = static_cast<bool>(std::getline(fields, window, ',')) &&
              static_cast<bool>(std::getline(fields, ip, ',')) && parse_ipv4(ip, addr);
    if (ok) {
      try {
        std::size_t used = 0;
        window_id = std::stoull(window, &used);
        ok = used == window.size();
      } catch (...) {
        ok = false;
      }
    }
    if (!ok)
      throw CliError{kDataError, "parse",
                     path + ":" + std::to_string(line_no) + ": expected window_id,ip,..."};
    detected[window_id].push_back(addr);
  }
  return detected;
}

int cmd_eval(RunConfig& c) {
  resolve(c);
  auto detected = read_reports(c.reports);
  sspd_truth* truth_raw = nullptr;
  check(sspd_truth_read(c.truth.c_str(), &truth_raw));
  Truth truth(truth_raw);

  std::set<std::uint64_t> windows;
  for (std::size_t i = 0; i < sspd_truth_window_count(truth.get()); ++i)
    windows.insert(sspd_truth_window_id(truth.get(), i));
  for (const auto& [id, ips] : detected) windows.insert(id);

  Output out(c.out);
  out.stream() << header(c)
               << "# FPR and FNR are both normalized by the true super point count; "
                  "precision_conventional is TP/detected\n"
               << "window_id,FPR,FNR,FTR,detected,truth,precision_conventional\n";
  std::size_t defined = 0;
  for (const auto id : windows) {
    std::size_t count = 0;
    check(sspd_truth_superpoints(truth.get(), id, c.theta, nullptr, 0, &count));
    std::vector<std::uint32_t> points(count);
    check(sspd_truth_superpoints(truth.get(), id, c.theta, points.data(), points.size(), &count));
    const auto& ips = detected[id];
    if (points.empty()) {
      out.stream() << "# window " << id << ": no true super points, rates undefined (detected "
                   << ips.size() << ")\n";
      continue;
    }
    sspd_metrics m;
    check(sspd_compute_metrics(ips.data(), ips.size(), points.data(), points.size(), &m));
    ++defined;
    out.stream() << id << ',' << fixed(m.fpr, 6) << ',' << fixed(m.fnr, 6) << ',' << fixed(m.ftr, 6)
                 << ',' << m.detected << ',' << m.truth << ',' << fixed(m.precision, 6) << '\n';
  }
  out.close();
  if (defined == 0 && !windows.empty())
    throw CliError{kDataError, "undefined_metric", "no window has true super points at theta " +
                                                       std::to_string(c.theta)};
  return kOk;
}

int cmd_plan(RunConfig& c) {
  if (c.lr != 0 || c.lc != 0) config_error("plan chooses LR and LC; drop --lr/--lc");
  resolve(c);
  std::uint64_t seav_bytes = 0, ldca_bytes = 0;
  check(sspd_memory(&c.params, &seav_bytes, &ldca_bytes));
  Output out(c.out);
  out.stream() << header(c) << "V=" << c.v << " N=" << general(c.design_n) << " k=" << c.k << '\n'
               << "optimal_rows=" << fixed(c.plan.optimal_rows, 6)
               << " unclamped_rows=" << c.plan.unclamped_rows << '\n'
               << "LR=" << c.plan.rows << " LC=" << c.plan.columns << '\n'
               << "Psu=" << general(c.plan.psu) << " Psu*k=" << general(c.plan.noise) << '\n'
               << "seav_bytes=" << seav_bytes << " ldca_bytes=" << ldca_bytes << '\n';
  out.close();
  return kOk;
}

void add_sketch_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--seed", c.seed, "Master hash seed")->capture_default_str();
  sub->add_option("--theta", c.theta, "Super point threshold")->capture_default_str();
  sub->add_option("--beta", c.beta, "Keep candidates estimated at >= beta*theta")
      ->capture_default_str();
  sub->add_option("--r", c.r, "Right-part bits selecting the short array")->capture_default_str();
  sub->add_option("--sr", c.sr, "Rows per short array")->capture_default_str();
  sub->add_option("--a", c.a, "Index bits shared by consecutive rows")->capture_default_str();
  sub->add_option("--g", c.g, "Short register width in bits")->capture_default_str();
  sub->add_option("--address-bits", c.address_bits, "Host address width")->capture_default_str();
  sub->add_option("--k", c.k, "Bits per long counter")->capture_default_str();
  auto* v = sub->add_option("--v", c.v, "Long counter count V, split by the planner")
                ->capture_default_str();
  auto* lr = sub->add_option("--lr", c.lr, "Long counter rows (with --lc, skips the planner)");
  auto* lc = sub->add_option("--lc", c.lc, "Long counter columns");
  auto* budget = sub->add_option("--memory-budget", c.memory_budget,
                                 "Total sketch bytes; sets V for the planner");
  budget->excludes(v)->excludes(lr)->excludes(lc);
  v->excludes(lr)->excludes(lc);
  sub->add_option("--max-rows", c.max_rows, "Planner row clamp, 0 for none")->capture_default_str();
  sub->add_option("--design-n", c.design_n, "Expected distinct pairs per window")
      ->capture_default_str();
  sub->add_option("--restore-cap", c.restore_cap, "Per-array candidate enumeration cap")
      ->capture_default_str();
  sub->add_option("--window-seconds", c.window_seconds, "Window length")->capture_default_str();
  sub->add_option("--slice-seconds", c.slice_seconds, "Trace slice length")->capture_default_str();
  sub->add_option("--window-slices", c.window_slices,
                  "Window length in slices (default window-seconds / slice-seconds)");
  sub->add_option("--threads", c.threads, "Scanner threads")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Super point detection over IP-pair traces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sspd_version());
  RunConfig c;

  auto* gen = app.add_subcommand("generate", "Write a synthetic trace and its truth sidecar");
  add_sketch_options(gen, c);
  gen->add_option("--out", c.out, "Trace path (.txt/.csv for text)")->required();
  gen->add_option("--truth", c.truth, "Truth sidecar path (default <out>.truth)");
  gen->add_option("--n-super", c.n_super, "Planted super points")->capture_default_str();
  gen->add_option("--super-min", c.super_min)->capture_default_str();
  gen->add_option("--super-max", c.super_max)->capture_default_str();
  gen->add_option("--n-background", c.n_background, "Background hosts")->capture_default_str();
  gen->add_option("--background-min", c.background_min)->capture_default_str();
  gen->add_option("--background-max", c.background_max)->capture_default_str();
  gen->add_option("--pairs", c.pairs, "Total pairs including repeats")->capture_default_str();
  gen->add_option("--slices", c.slices, "Slices the pairs are spread over")->capture_default_str();
  gen->add_option("--trace-seed", c.trace_seed, "Generator seed (default --seed)");

  auto* det = app.add_subcommand("detect", "Discrete-window detection");
  add_sketch_options(det, c);
  det->add_option("--trace", c.trace)->required();
  det->add_option("--out", c.out, "Report CSV, - for stdout")->capture_default_str();

  auto* slide = app.add_subcommand("slide", "Sliding-window detection");
  add_sketch_options(slide, c);
  slide->add_option("--trace", c.trace)->required();
  slide->add_option("--out", c.out, "Report CSV, - for stdout")->capture_default_str();
  slide->add_option("--detect-every", c.detect_every, "Detect every n slices")
      ->capture_default_str();

  auto* dist = app.add_subcommand("distsim", "Simulated watch points with a merging server");
  add_sketch_options(dist, c);
  dist->add_option("--trace", c.trace)->required();
  dist->add_option("--out", c.out, "Report CSV, - for stdout")->capture_default_str();
  dist->add_option("--n-wp", c.n_wp, "Watch points")->capture_default_str();
  dist->add_option("--route", c.route, "Pair routing")
      ->check(CLI::IsMember({"hash", "round-robin"}))
      ->capture_default_str();
  dist->add_option("--buffer", c.buffer, "Pairs per watch point batch")->capture_default_str();
  dist->add_option("--frames-dir", c.frames_dir, "Write frame files here");
  dist->add_option("--log", c.log, "Merge equivalence log (default <out>.log)");

  auto* ev = app.add_subcommand("eval", "Score a report CSV against a truth sidecar");
  add_sketch_options(ev, c);
  ev->add_option("--reports", c.reports)->required();
  ev->add_option("--truth", c.truth)->required();
  ev->add_option("--out", c.out, "Metrics CSV, - for stdout")->capture_default_str();

  auto* plan = app.add_subcommand("plan", "Split V long counters into rows and columns");
  add_sketch_options(plan, c);
  plan->add_option("--out", c.out, "- for stdout")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << nlohmann::json{{"error", "usage"}, {"exit", kConfigError}, {"message", e.what()}}.dump()
              << '\n';
    return kConfigError;
  }

  try {
    for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
    if (c.command == "generate") return cmd_generate(c);
    if (c.command == "detect") return cmd_detect(c);
    if (c.command == "slide") return cmd_slide(c);
    if (c.command == "distsim") return cmd_distsim(c);
    if (c.command == "eval") return cmd_eval(c);
    if (c.command == "plan") return cmd_plan(c);
    throw CliError{kInternalError, "internal", "unhandled command " + c.command};
  } catch (const CliError& e) {
    std::cerr << nlohmann::json{{"error", e.code}, {"exit", e.exit_code}, {"message", e.message}}.dump()
              << '\n';
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "internal"}, {"exit", kInternalError}, {"message", e.what()}}
                     .dump()
              << '\n';
    return kInternalError;
  }
}
