/*
 * libsspd: super point detection from IP-pair streams.
 *
 * C interface over the sketch library. Every object is an opaque handle
 * released with its matching *_free function. Fallible calls return an
 * sspd_status; on failure sspd_last_error() holds a message for the calling
 * thread until its next failing call.
 */
#ifndef SSPD_H
#define SSPD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SSPD_BUILDING_LIBRARY)
#    define SSPD_API __declspec(dllexport)
#  else
#    define SSPD_API __declspec(dllimport)
#  endif
#else
#  define SSPD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sspd_status {
  SSPD_OK = 0,
  SSPD_ERR_INVALID_ARGUMENT = 1,
  SSPD_ERR_CONFIG = 2,
  SSPD_ERR_RESTORE_OVERFLOW = 3,
  SSPD_ERR_BAD_MAGIC = 4,
  SSPD_ERR_BAD_VERSION = 5,
  SSPD_ERR_BAD_CHECKSUM = 6,
  SSPD_ERR_TRUNCATED = 7,
  SSPD_ERR_MERGE_INCOMPATIBLE = 8,
  SSPD_ERR_WINDOW_MISMATCH = 9,
  SSPD_ERR_MISSING_KIND = 10,
  SSPD_ERR_UNDEFINED_METRIC = 11,
  SSPD_ERR_IO = 12,
  SSPD_ERR_PARSE = 13,
  SSPD_ERR_BUFFER_TOO_SMALL = 14,
  SSPD_ERR_INTERNAL = 15
} sspd_status;

SSPD_API const char* sspd_last_error(void);
SSPD_API const char* sspd_status_name(sspd_status status);
SSPD_API const char* sspd_version(void);

/* ---- configuration ------------------------------------------------------ */

typedef struct sspd_params {
  uint64_t master_seed;   /* default 0x5EED */
  uint32_t theta;         /* super point threshold, default 1024 */
  double beta;            /* filter slack in (0, 1], default 0.8 */
  uint32_t r;             /* right-part bits choosing the short array, default 4 */
  uint32_t rows;          /* rows per short array (SR), default 4 */
  uint32_t overlap;       /* shared index bits between consecutive rows, default 2 */
  uint32_t g;             /* short register width, default 8 */
  uint32_t address_bits;  /* host address width, default 32 */
  uint32_t k;             /* bits per linear counter, default 8192 */
  uint32_t ldca_rows;     /* LR, default 8 */
  uint32_t ldca_columns;  /* LC, default 1024 */
  uint64_t restore_cap;   /* per-array enumeration cap, default 2^20 */
} sspd_params;

SSPD_API void sspd_params_default(sspd_params* params);
SSPD_API sspd_status sspd_params_validate(const sspd_params* params);
SSPD_API sspd_status sspd_memory(const sspd_params* params, uint64_t* seav_bytes,
                                 uint64_t* ldca_bytes);
SSPD_API sspd_status sspd_tau(uint64_t theta, uint32_t g, uint32_t* tau);

typedef struct sspd_plan {
  double optimal_rows;     /* continuous optimum */
  uint32_t unclamped_rows; /* best integer row count */
  uint32_t rows;           /* after clamping to [1, max_rows] */
  uint32_t columns;        /* floor(V / rows) */
  double psu;              /* probability a union counter bit is set */
  double noise;            /* psu * k */
} sspd_plan;

/* max_rows == 0 disables the clamp. */
SSPD_API sspd_status sspd_plan_rows(uint64_t counters, double n_pairs, uint32_t k,
                                    uint32_t max_rows, sspd_plan* out);
SSPD_API sspd_status sspd_psu(double k, double n_pairs, double columns, double rows,
                              double* out);

/* ---- reports ------------------------------------------------------------ */

typedef struct sspd_pair {
  uint32_t hip;
  uint32_t oip;
} sspd_pair;

typedef struct sspd_record {
  uint32_t slice;
  uint32_t hip;
  uint32_t oip;
} sspd_record;

typedef struct sspd_report {
  uint32_t ip;
  double estimated_cardinality;
  int saturated;
  uint64_t window_id;
  int sliding; /* 0 discrete, 1 sliding */
} sspd_report;

typedef struct sspd_reports sspd_reports;

SSPD_API size_t sspd_reports_count(const sspd_reports* reports);
SSPD_API sspd_status sspd_reports_get(const sspd_reports* reports, size_t index, sspd_report* out);
/* Right-part values of short arrays skipped because restore hit its cap. */
SSPD_API size_t sspd_reports_overflow_count(const sspd_reports* reports);
SSPD_API uint32_t sspd_reports_overflow_get(const sspd_reports* reports, size_t index);
SSPD_API void sspd_reports_free(sspd_reports* reports);

/* ---- discrete window detector ------------------------------------------- */

typedef struct sspd_detector sspd_detector;

typedef enum sspd_frame_kind { SSPD_FRAME_SEAV = 0, SSPD_FRAME_LDCA = 1 } sspd_frame_kind;

SSPD_API sspd_status sspd_detector_create(const sspd_params* params, uint64_t window_id,
                                          sspd_detector** out);
SSPD_API void sspd_detector_free(sspd_detector* detector);
/* Thread-safe against other process calls on the same detector. */
SSPD_API void sspd_detector_process_pair(sspd_detector* detector, uint32_t hip, uint32_t oip);
SSPD_API sspd_status sspd_detector_process_batch(sspd_detector* detector, const sspd_pair* pairs,
                                                 size_t count, unsigned threads);
SSPD_API sspd_status sspd_detector_finalize(const sspd_detector* detector, unsigned threads,
                                            sspd_reports** out);
SSPD_API void sspd_detector_reset(sspd_detector* detector);
SSPD_API uint64_t sspd_detector_window_id(const sspd_detector* detector);
SSPD_API uint64_t sspd_detector_pair_count(const sspd_detector* detector);
/* 1 when both detectors hold bit-identical sketches under the same config. */
SSPD_API int sspd_detector_equal(const sspd_detector* a, const sspd_detector* b);
SSPD_API sspd_status sspd_detector_merge(sspd_detector* into, const sspd_detector* from);

/* Writes one frame. *length receives the frame size; with buffer == NULL or
 * a short capacity the call returns SSPD_ERR_BUFFER_TOO_SMALL. */
SSPD_API sspd_status sspd_detector_export_frame(const sspd_detector* detector,
                                                sspd_frame_kind kind, uint8_t* buffer,
                                                size_t capacity, size_t* length);
/* OR-merges SEAV and LDCA frames of one window into a new detector. */
SSPD_API sspd_status sspd_detector_from_frames(const uint8_t* const* frames, const size_t* lengths,
                                               size_t count, double beta, sspd_detector** out);

/* ---- sliding window detector -------------------------------------------- */

typedef struct sspd_sliding sspd_sliding;

SSPD_API sspd_status sspd_sliding_create(const sspd_params* params, uint32_t window_slices,
                                         sspd_sliding** out);
SSPD_API void sspd_sliding_free(sspd_sliding* sliding);
/* Records the pair in the current slice. */
SSPD_API void sspd_sliding_process_pair(sspd_sliding* sliding, uint32_t hip, uint32_t oip);
SSPD_API sspd_status sspd_sliding_process_batch(sspd_sliding* sliding, const sspd_pair* pairs,
                                                size_t count, unsigned threads);
SSPD_API sspd_status sspd_sliding_advance_to(sspd_sliding* sliding, uint64_t slice);
SSPD_API uint64_t sspd_sliding_now(const sspd_sliding* sliding);
SSPD_API uint64_t sspd_sliding_memory(const sspd_sliding* sliding);
SSPD_API sspd_status sspd_sliding_detect(const sspd_sliding* sliding, unsigned threads,
                                         sspd_reports** out);

/* ---- simulated watch points --------------------------------------------- */

typedef enum sspd_route { SSPD_ROUTE_HASH = 0, SSPD_ROUTE_ROUND_ROBIN = 1 } sspd_route;

typedef struct sspd_topology {
  uint32_t watch_points;
  sspd_route route;
  size_t buffer_pairs;    /* per watch point batch, default 65536 */
  unsigned threads;
  const char* frame_dir;  /* NULL: frames stay in memory */
} sspd_topology;

SSPD_API void sspd_topology_default(sspd_topology* topology);
/* Scans one window over the topology, merges frames at the global server and
 * restores. Either output pointer may be NULL. */
SSPD_API sspd_status sspd_simulate_window(const sspd_params* params, const sspd_pair* pairs,
                                          size_t count, uint64_t window_id,
                                          const sspd_topology* topology,
                                          sspd_detector** global_out, sspd_reports** reports_out,
                                          uint64_t* frame_bytes);

/* ---- traces, ground truth, metrics -------------------------------------- */

typedef struct sspd_trace sspd_trace;

typedef struct sspd_trace_spec {
  uint32_t n_super;
  uint32_t super_min, super_max;
  uint32_t n_background;
  uint32_t background_min, background_max;
  uint64_t n_pairs;
  uint32_t slices;
  uint64_t seed;
} sspd_trace_spec;

SSPD_API void sspd_trace_spec_default(sspd_trace_spec* spec);
SSPD_API sspd_status sspd_trace_generate(const sspd_trace_spec* spec, sspd_trace** out);
SSPD_API sspd_status sspd_trace_read(const char* path, sspd_trace** out);
/* text != 0 writes `header` then `slice,src,dst` lines; otherwise 12-byte
 * binary records and `header` is ignored. */
SSPD_API sspd_status sspd_trace_write(const sspd_trace* trace, const char* path, int text,
                                      const char* header);
SSPD_API sspd_status sspd_trace_write_truth(const sspd_trace* trace, uint32_t window_slices,
                                            const char* path, const char* header);
SSPD_API size_t sspd_trace_size(const sspd_trace* trace);
SSPD_API const sspd_record* sspd_trace_records(const sspd_trace* trace);
SSPD_API void sspd_trace_free(sspd_trace* trace);

typedef struct sspd_truth sspd_truth;

SSPD_API sspd_status sspd_truth_read(const char* path, sspd_truth** out);
SSPD_API size_t sspd_truth_window_count(const sspd_truth* truth);
SSPD_API uint64_t sspd_truth_window_id(const sspd_truth* truth, size_t index);
/* Sorted super points of a window; *count receives the full count. A window
 * absent from the sidecar has none. */
SSPD_API sspd_status sspd_truth_superpoints(const sspd_truth* truth, uint64_t window_id,
                                            uint64_t theta, uint32_t* buffer, size_t capacity,
                                            size_t* count);
SSPD_API void sspd_truth_free(sspd_truth* truth);

typedef struct sspd_metrics {
  double fpr;       /* false positives / true super points */
  double fnr;       /* false negatives / true super points */
  double ftr;       /* fpr + fnr */
  double precision; /* true positives / detected */
  size_t detected;
  size_t truth;
} sspd_metrics;

SSPD_API sspd_status sspd_compute_metrics(const uint32_t* detected, size_t detected_count,
                                          const uint32_t* truth, size_t truth_count,
                                          sspd_metrics* out);

#ifdef __cplusplus
}
#endif

#endif /* SSPD_H */
