#include "sspd/sspd.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "sspd/distributed.hpp"
#include "sspd/error.hpp"
#include "sspd/eval.hpp"
#include "sspd/sliding_detector.hpp"
#include "sspd/window_detector.hpp"

struct sspd_reports {
  sspd::FinalizeResult result;
};

struct sspd_detector {
  sspd::WindowDetector detector;
};

struct sspd_sliding {
  sspd::SlidingDetector detector;
};

struct sspd_trace {
  std::vector<sspd::TraceRecord> records;
};

struct sspd_truth {
  std::vector<sspd::WindowTruth> windows;
};

static_assert(sizeof(sspd_pair) == sizeof(sspd::IpPair));
static_assert(sizeof(sspd_record) == sizeof(sspd::TraceRecord));

namespace {

thread_local std::string last_error;

sspd_status status_of(sspd::ErrorCode code) {
  using sspd::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return SSPD_ERR_INVALID_ARGUMENT;
    case ErrorCode::config_invalid: return SSPD_ERR_CONFIG;
    case ErrorCode::restore_overflow: return SSPD_ERR_RESTORE_OVERFLOW;
    case ErrorCode::bad_magic: return SSPD_ERR_BAD_MAGIC;
    case ErrorCode::bad_version: return SSPD_ERR_BAD_VERSION;
    case ErrorCode::bad_checksum: return SSPD_ERR_BAD_CHECKSUM;
    case ErrorCode::truncated: return SSPD_ERR_TRUNCATED;
    case ErrorCode::merge_incompatible: return SSPD_ERR_MERGE_INCOMPATIBLE;
    case ErrorCode::window_mismatch: return SSPD_ERR_WINDOW_MISMATCH;
    case ErrorCode::missing_kind: return SSPD_ERR_MISSING_KIND;
    case ErrorCode::undefined_metric: return SSPD_ERR_UNDEFINED_METRIC;
    case ErrorCode::io: return SSPD_ERR_IO;
    case ErrorCode::parse: return SSPD_ERR_PARSE;
  }
  return SSPD_ERR_INTERNAL;
}

sspd_status set_error(sspd_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <class F>
sspd_status guarded(F&& body) noexcept {
  try {
    body();
    return SSPD_OK;
  } catch (const sspd::Error& e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SSPD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SSPD_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(SSPD_ERR_INTERNAL, "unknown exception");
  }
}

void require(bool ok, const char* what) {
  if (!ok) sspd::fail(sspd::ErrorCode::invalid_argument, what);
}

sspd::DetectorConfig to_config(const sspd_params* p) {
  require(p != nullptr, "params is null");
  sspd::DetectorConfig config;
  config.seav = sspd::make_seav_config(p->r, p->rows, p->overlap, p->theta, p->g, p->address_bits);
  config.ldca = sspd::LdcaConfig{p->ldca_rows, p->ldca_columns, p->k};
  config.master_seed = p->master_seed;
  config.beta = p->beta;
  config.restore_cap = static_cast<std::size_t>(p->restore_cap);
  sspd::validate_detector_config(config);
  return config;
}

std::span<const sspd::IpPair> as_pairs(const sspd_pair* pairs, std::size_t count) {
  require(pairs != nullptr || count == 0, "pairs is null");
  return {reinterpret_cast<const sspd::IpPair*>(pairs), count};
}

}  // namespace

extern "C" {

const char* sspd_last_error(void) { return last_error.c_str(); }

const char* sspd_status_name(sspd_status status) {
  switch (status) {
    case SSPD_OK: return "ok";
    case SSPD_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SSPD_ERR_CONFIG: return "config_invalid";
    case SSPD_ERR_RESTORE_OVERFLOW: return "restore_overflow";
    case SSPD_ERR_BAD_MAGIC: return "bad_magic";
    case SSPD_ERR_BAD_VERSION: return "bad_version";
    case SSPD_ERR_BAD_CHECKSUM: return "bad_checksum";
    case SSPD_ERR_TRUNCATED: return "truncated";
    case SSPD_ERR_MERGE_INCOMPATIBLE: return "merge_incompatible";
    case SSPD_ERR_WINDOW_MISMATCH: return "window_mismatch";
    case SSPD_ERR_MISSING_KIND: return "missing_kind";
    case SSPD_ERR_UNDEFINED_METRIC: return "undefined_metric";
    case SSPD_ERR_IO: return "io";
    case SSPD_ERR_PARSE: return "parse";
    case SSPD_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
    case SSPD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* sspd_version(void) { return "1.0.0"; }

void sspd_params_default(sspd_params* p) {
  if (!p) return;
  const sspd::DetectorConfig d;
  p->master_seed = d.master_seed;
  p->theta = d.seav.theta;
  p->beta = d.beta;
  p->r = d.seav.r;
  p->rows = d.seav.rows;
  p->overlap = d.seav.overlap;
  p->g = d.seav.g;
  p->address_bits = d.seav.address_bits;
  p->k = d.ldca.k;
  p->ldca_rows = d.ldca.rows;
  p->ldca_columns = d.ldca.columns;
  p->restore_cap = d.restore_cap;
}

sspd_status sspd_params_validate(const sspd_params* params) {
  return guarded([&] { to_config(params); });
}

sspd_status sspd_memory(const sspd_params* params, uint64_t* seav_bytes, uint64_t* ldca_bytes) {
  return guarded([&] {
    const auto config = to_config(params);
    if (seav_bytes) *seav_bytes = config.seav.memory_bytes();
    if (ldca_bytes) *ldca_bytes = config.ldca.memory_bytes();
  });
}

sspd_status sspd_tau(uint64_t theta, uint32_t g, uint32_t* tau) {
  return guarded([&] {
    require(tau != nullptr, "tau is null");
    *tau = sspd::tau_from_theta(theta, g);
  });
}

sspd_status sspd_plan_rows(uint64_t counters, double n_pairs, uint32_t k, uint32_t max_rows,
                           sspd_plan* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    const auto plan = sspd::plan_rows(counters, n_pairs, k, max_rows);
    out->optimal_rows = plan.optimal_rows;
    out->unclamped_rows = plan.unclamped_rows;
    out->rows = plan.rows;
    out->columns = plan.columns;
    out->psu = plan.psu;
    out->noise = plan.noise;
  });
}

sspd_status sspd_psu(double k, double n_pairs, double columns, double rows, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = sspd::psu(k, n_pairs, columns, rows);
  });
}

size_t sspd_reports_count(const sspd_reports* reports) {
  return reports ? reports->result.reports.size() : 0;
}

sspd_status sspd_reports_get(const sspd_reports* reports, size_t index, sspd_report* out) {
  return guarded([&] {
    require(reports != nullptr && out != nullptr, "null argument");
    require(index < reports->result.reports.size(), "report index out of range");
    const auto& r = reports->result.reports[index];
    out->ip = r.ip;
    out->estimated_cardinality = r.estimated_cardinality;
    out->saturated = r.saturated ? 1 : 0;
    out->window_id = r.window_id;
    out->sliding = r.source == sspd::ReportSource::sliding ? 1 : 0;
  });
}

size_t sspd_reports_overflow_count(const sspd_reports* reports) {
  return reports ? reports->result.overflowed.size() : 0;
}

uint32_t sspd_reports_overflow_get(const sspd_reports* reports, size_t index) {
  if (!reports || index >= reports->result.overflowed.size()) return 0;
  return reports->result.overflowed[index];
}

void sspd_reports_free(sspd_reports* reports) { delete reports; }

sspd_status sspd_detector_create(const sspd_params* params, uint64_t window_id,
                                 sspd_detector** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new sspd_detector{sspd::WindowDetector(to_config(params), window_id)};
  });
}

void sspd_detector_free(sspd_detector* detector) { delete detector; }

void sspd_detector_process_pair(sspd_detector* detector, uint32_t hip, uint32_t oip) {
  if (detector) detector->detector.process_pair(hip, oip);
}

sspd_status sspd_detector_process_batch(sspd_detector* detector, const sspd_pair* pairs,
                                        size_t count, unsigned threads) {
  return guarded([&] {
    require(detector != nullptr, "detector is null");
    detector->detector.process_batch(as_pairs(pairs, count), threads);
  });
}

sspd_status sspd_detector_finalize(const sspd_detector* detector, unsigned threads,
                                   sspd_reports** out) {
  return guarded([&] {
    require(detector != nullptr && out != nullptr, "null argument");
    *out = new sspd_reports{detector->detector.finalize(threads)};
  });
}

void sspd_detector_reset(sspd_detector* detector) {
  if (detector) detector->detector.reset();
}

uint64_t sspd_detector_window_id(const sspd_detector* detector) {
  return detector ? detector->detector.window_id() : 0;
}

uint64_t sspd_detector_pair_count(const sspd_detector* detector) {
  return detector ? detector->detector.pair_count() : 0;
}

int sspd_detector_equal(const sspd_detector* a, const sspd_detector* b) {
  if (!a || !b) return 0;
  const auto& x = a->detector;
  const auto& y = b->detector;
  return x.config().seav == y.config().seav && x.config().ldca == y.config().ldca &&
         x.config().master_seed == y.config().master_seed && x.seav() == y.seav() &&
         x.ldca() == y.ldca();
}

sspd_status sspd_detector_merge(sspd_detector* into, const sspd_detector* from) {
  return guarded([&] {
    require(into != nullptr && from != nullptr, "null argument");
    into->detector.merge(from->detector);
  });
}

sspd_status sspd_detector_export_frame(const sspd_detector* detector, sspd_frame_kind kind,
                                       uint8_t* buffer, size_t capacity, size_t* length) {
  sspd_status status = SSPD_OK;
  const auto guard = guarded([&] {
    require(detector != nullptr && length != nullptr, "null argument");
    require(kind == SSPD_FRAME_SEAV || kind == SSPD_FRAME_LDCA, "unknown frame kind");
    const auto k = static_cast<sspd::FrameKind>(kind);
    const auto size = sspd::frame_size(detector->detector.config(), k);
    *length = size;
    if (buffer == nullptr || capacity < size) {
      status = set_error(SSPD_ERR_BUFFER_TOO_SMALL,
                         "frame needs " + std::to_string(size) + " bytes");
      return;
    }
    const auto bytes = sspd::serialize_frame(detector->detector, k);
    std::memcpy(buffer, bytes.data(), bytes.size());
  });
  return guard != SSPD_OK ? guard : status;
}

sspd_status sspd_detector_from_frames(const uint8_t* const* frames, const size_t* lengths,
                                      size_t count, double beta, sspd_detector** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    require(count == 0 || (frames != nullptr && lengths != nullptr), "frames is null");
    std::vector<sspd::SketchFrame> decoded;
    decoded.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      require(frames[i] != nullptr, "frame is null");
      decoded.push_back(sspd::deserialize_frame({frames[i], lengths[i]}));
    }
    *out = new sspd_detector{sspd::merge_frames(decoded, beta)};
  });
}

sspd_status sspd_sliding_create(const sspd_params* params, uint32_t window_slices,
                                sspd_sliding** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new sspd_sliding{sspd::SlidingDetector(to_config(params), window_slices)};
  });
}

void sspd_sliding_free(sspd_sliding* sliding) { delete sliding; }

void sspd_sliding_process_pair(sspd_sliding* sliding, uint32_t hip, uint32_t oip) {
  if (sliding) sliding->detector.process_pair(hip, oip);
}

sspd_status sspd_sliding_process_batch(sspd_sliding* sliding, const sspd_pair* pairs,
                                       size_t count, unsigned threads) {
  return guarded([&] {
    require(sliding != nullptr, "sliding is null");
    sliding->detector.process_batch(as_pairs(pairs, count), threads);
  });
}

sspd_status sspd_sliding_advance_to(sspd_sliding* sliding, uint64_t slice) {
  return guarded([&] {
    require(sliding != nullptr, "sliding is null");
    sliding->detector.advance_to(slice);
  });
}

uint64_t sspd_sliding_now(const sspd_sliding* sliding) {
  return sliding ? sliding->detector.now() : 0;
}

uint64_t sspd_sliding_memory(const sspd_sliding* sliding) {
  return sliding ? sliding->detector.memory_bytes() : 0;
}

sspd_status sspd_sliding_detect(const sspd_sliding* sliding, unsigned threads,
                                sspd_reports** out) {
  return guarded([&] {
    require(sliding != nullptr && out != nullptr, "null argument");
    *out = new sspd_reports{sliding->detector.detect(threads)};
  });
}

void sspd_topology_default(sspd_topology* topology) {
  if (!topology) return;
  topology->watch_points = 1;
  topology->route = SSPD_ROUTE_HASH;
  topology->buffer_pairs = sspd::kDefaultBufferPairs;
  topology->threads = 1;
  topology->frame_dir = nullptr;
}

sspd_status sspd_simulate_window(const sspd_params* params, const sspd_pair* pairs, size_t count,
                                 uint64_t window_id, const sspd_topology* topology,
                                 sspd_detector** global_out, sspd_reports** reports_out,
                                 uint64_t* frame_bytes) {
  return guarded([&] {
    require(topology != nullptr, "topology is null");
    require(topology->route == SSPD_ROUTE_HASH || topology->route == SSPD_ROUTE_ROUND_ROBIN,
            "unknown route");
    sspd::TopologyOptions options;
    options.watch_points = topology->watch_points;
    options.route = topology->route == SSPD_ROUTE_HASH ? sspd::Route::hash : sspd::Route::round_robin;
    options.buffer_pairs = topology->buffer_pairs;
    options.threads = topology->threads;
    if (topology->frame_dir) options.frame_dir = topology->frame_dir;
    auto window = sspd::simulate_window(to_config(params), as_pairs(pairs, count), window_id, options);
    std::unique_ptr<sspd_reports> reports;
    if (reports_out) reports.reset(new sspd_reports{std::move(window.result)});
    if (global_out) *global_out = new sspd_detector{std::move(window.global)};
    if (reports_out) *reports_out = reports.release();
    if (frame_bytes) *frame_bytes = window.frame_bytes;
  });
}

void sspd_trace_spec_default(sspd_trace_spec* spec) {
  if (!spec) return;
  const sspd::TraceSpec d;
  spec->n_super = d.n_super;
  spec->super_min = d.super_cardinality.min;
  spec->super_max = d.super_cardinality.max;
  spec->n_background = d.n_background;
  spec->background_min = d.background_cardinality.min;
  spec->background_max = d.background_cardinality.max;
  spec->n_pairs = d.n_pairs;
  spec->slices = d.slices;
  spec->seed = d.seed;
}

sspd_status sspd_trace_generate(const sspd_trace_spec* spec, sspd_trace** out) {
  return guarded([&] {
    require(spec != nullptr && out != nullptr, "null argument");
    sspd::TraceSpec s;
    s.n_super = spec->n_super;
    s.super_cardinality = {spec->super_min, spec->super_max};
    s.n_background = spec->n_background;
    s.background_cardinality = {spec->background_min, spec->background_max};
    s.n_pairs = spec->n_pairs;
    s.slices = spec->slices;
    s.seed = spec->seed;
    *out = new sspd_trace{sspd::generate_trace(s).records};
  });
}

sspd_status sspd_trace_read(const char* path, sspd_trace** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new sspd_trace{sspd::read_trace(path)};
  });
}

sspd_status sspd_trace_write(const sspd_trace* trace, const char* path, int text,
                             const char* header) {
  return guarded([&] {
    require(trace != nullptr && path != nullptr, "null argument");
    if (text)
      sspd::write_trace_text(path, trace->records, header ? header : "");
    else
      sspd::write_trace_binary(path, trace->records);
  });
}

sspd_status sspd_trace_write_truth(const sspd_trace* trace, uint32_t window_slices,
                                   const char* path, const char* header) {
  return guarded([&] {
    require(trace != nullptr && path != nullptr, "null argument");
    require(window_slices > 0, "window_slices must be positive");
    const auto windows = sspd::window_truth(trace->records, window_slices);
    sspd::write_truth(path, windows, header ? header : "");
  });
}

size_t sspd_trace_size(const sspd_trace* trace) { return trace ? trace->records.size() : 0; }

const sspd_record* sspd_trace_records(const sspd_trace* trace) {
  if (!trace || trace->records.empty()) return nullptr;
  return reinterpret_cast<const sspd_record*>(trace->records.data());
}

void sspd_trace_free(sspd_trace* trace) { delete trace; }

sspd_status sspd_truth_read(const char* path, sspd_truth** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new sspd_truth{sspd::read_truth(path)};
  });
}

size_t sspd_truth_window_count(const sspd_truth* truth) {
  return truth ? truth->windows.size() : 0;
}

uint64_t sspd_truth_window_id(const sspd_truth* truth, size_t index) {
  if (!truth || index >= truth->windows.size()) return 0;
  return truth->windows[index].window_id;
}

sspd_status sspd_truth_superpoints(const sspd_truth* truth, uint64_t window_id, uint64_t theta,
                                   uint32_t* buffer, size_t capacity, size_t* count) {
  return guarded([&] {
    require(truth != nullptr && count != nullptr, "null argument");
    std::vector<std::uint32_t> points;
    for (const auto& w : truth->windows)
      if (w.window_id == window_id) points = sspd::superpoints_of(w.hosts, theta);
    *count = points.size();
    if (buffer) std::copy_n(points.begin(), std::min(capacity, points.size()), buffer);
  });
}

void sspd_truth_free(sspd_truth* truth) { delete truth; }

sspd_status sspd_compute_metrics(const uint32_t* detected, size_t detected_count,
                                 const uint32_t* truth, size_t truth_count, sspd_metrics* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    require(detected != nullptr || detected_count == 0, "detected is null");
    require(truth != nullptr || truth_count == 0, "truth is null");
    const auto m = sspd::compute_metrics({detected, detected_count}, {truth, truth_count});
    out->fpr = m.fpr;
    out->fnr = m.fnr;
    out->ftr = m.ftr;
    out->precision = m.precision;
    out->detected = m.detected;
    out->truth = m.truth;
  });
}

}  // extern "C"
