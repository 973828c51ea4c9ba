#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace volspill {

/// Failure categories shared by every module. The CLI prints the name in its
/// machine-readable error report.
enum class ErrorKind {
  MissingColumn,
  UnparseableDate,
  NonNumericCell,
  DuplicateDate,
  EmptyIntersection,
  NonPositivePrice,
  TooFewObservations,
  ZeroVariance,
  TooManyLags,
  SingularRegression,
  SampleTooShort,
  SingularDesign,
  NonInvertibleMA,
  NonConvergence,
  InvalidParams,
  NonPositiveDefiniteR,
  InterceptNotPSD,
  EmptyWindow,
  DegenerateDenominator,
  InvalidDgp,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace volspill
