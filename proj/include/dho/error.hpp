#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dho {

enum class ErrorCode {
  InvalidArgument,
  OriginUndefined,
  AxisUndefined,
  DomainError,
  QuadraturePathInvalid,
  NonConvergence,
  NoRootInBracket,
  StepFailure,
  SegmentSpansCrossing,
  PoleAt,
  SeriesNotConverged,
  OutsideTrustedWindow,
  TruncationUnstable,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dho
