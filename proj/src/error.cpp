#include "imtrack/error.hpp"

#include <cmath>
#include <cstdio>

namespace imtrack {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroAlphaSum: return "ZeroAlphaSum";
    case ErrorCode::BadSector: return "BadSector";
    case ErrorCode::DegenerateSector: return "DegenerateSector";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::RouteMismatch: return "RouteMismatch";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::Singularity: return "Singularity";
    case ErrorCode::BadPerturbations: return "BadPerturbations";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::Condition1Violated: return "Condition1Violated";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence:
    case ErrorCode::IllConditioned:
    case ErrorCode::RouteMismatch:
    case ErrorCode::Divergence:
      return false;
    default:
      return true;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code), detail_(what) {}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void require_sector(double m, double L) {
  if (!std::isfinite(m) || !std::isfinite(L) || !(m > 0.0) || !(L >= m)) {
    throw Error(ErrorCode::BadSector, "need 0 < m <= L, got m=" + format_number(m) +
                                          ", L=" + format_number(L));
  }
}

}  // namespace imtrack
