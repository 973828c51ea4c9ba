#include "volspill/errors.hpp"

namespace volspill {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::UnparseableDate: return "UnparseableDate";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::DuplicateDate: return "DuplicateDate";
    case ErrorKind::EmptyIntersection: return "EmptyIntersection";
    case ErrorKind::NonPositivePrice: return "NonPositivePrice";
    case ErrorKind::TooFewObservations: return "TooFewObservations";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::TooManyLags: return "TooManyLags";
    case ErrorKind::SingularRegression: return "SingularRegression";
    case ErrorKind::SampleTooShort: return "SampleTooShort";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::NonInvertibleMA: return "NonInvertibleMA";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::NonPositiveDefiniteR: return "NonPositiveDefiniteR";
    case ErrorKind::InterceptNotPSD: return "InterceptNotPSD";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::InvalidDgp: return "InvalidDgp";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace volspill
