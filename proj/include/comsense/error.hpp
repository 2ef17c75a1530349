#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace comsense {

enum class ErrorCode {
  InvalidCutoff,
  CutoffTooSmall,
  DimensionMismatch,
  NotHermitian,
  UnstableRegime,
  InvalidRegime,
  Divergence,
  InternalConsistency,
  GridCoverage,
  StepTooSmall,
  InvalidArgument,
};

/// Short upper-case tag used in CSV error cells, e.g. "CUTOFF".
std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace comsense
