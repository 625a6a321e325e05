#include "sspd/error.hpp"

namespace sspd {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::config_invalid: return "config-invalid";
    case ErrorCode::restore_overflow: return "restore-overflow";
    case ErrorCode::bad_magic: return "bad-magic";
    case ErrorCode::bad_version: return "bad-version";
    case ErrorCode::bad_checksum: return "bad-checksum";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::merge_incompatible: return "merge-incompatible";
    case ErrorCode::window_mismatch: return "window-mismatch";
    case ErrorCode::missing_kind: return "missing-kind";
    case ErrorCode::undefined_metric: return "undefined-metric";
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace sspd
