#pragma once

#include <stdexcept>
#include <string>

namespace sspd {

enum class ErrorCode {
  invalid_argument,
  config_invalid,
  restore_overflow,
  bad_magic,
  bad_version,
  bad_checksum,
  truncated,
  merge_incompatible,
  window_mismatch,
  missing_kind,
  undefined_metric,
  io,
  parse,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace sspd
