#include "dho/error.hpp"

namespace dho {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OriginUndefined: return "OriginUndefined";
    case ErrorCode::AxisUndefined: return "AxisUndefined";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::QuadraturePathInvalid: return "QuadraturePathInvalid";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NoRootInBracket: return "NoRootInBracket";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::SegmentSpansCrossing: return "SegmentSpansCrossing";
    case ErrorCode::PoleAt: return "PoleAt";
    case ErrorCode::SeriesNotConverged: return "SeriesNotConverged";
    case ErrorCode::OutsideTrustedWindow: return "OutsideTrustedWindow";
    case ErrorCode::TruncationUnstable: return "TruncationUnstable";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace dho
