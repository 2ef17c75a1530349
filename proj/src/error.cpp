#include "comsense/error.hpp"

namespace comsense {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidCutoff: return "INVALID_CUTOFF";
    case ErrorCode::CutoffTooSmall: return "CUTOFF";
    case ErrorCode::DimensionMismatch: return "DIMENSION";
    case ErrorCode::NotHermitian: return "NOT_HERMITIAN";
    case ErrorCode::UnstableRegime: return "UNSTABLE";
    case ErrorCode::InvalidRegime: return "REGIME";
    case ErrorCode::Divergence: return "DIVERGED";
    case ErrorCode::InternalConsistency: return "CONSISTENCY";
    case ErrorCode::GridCoverage: return "GRID";
    case ErrorCode::StepTooSmall: return "STEP";
    case ErrorCode::InvalidArgument: return "ARGUMENT";
  }
  return "UNKNOWN";
}

}  // namespace comsense
