#pragma once

#include <stdexcept>
#include <string>

namespace imtrack {

enum class ErrorCode {
  ZeroAlphaSum,
  BadSector,
  DegenerateSector,
  LengthMismatch,
  InvalidArgument,
  NonConvergence,
  IllConditioned,
  RouteMismatch,
  DomainViolation,
  Singularity,
  BadPerturbations,
  DimensionMismatch,
  Divergence,
  Condition1Violated,
  InvalidConfig,
};

const char* error_code_name(ErrorCode code);

// Invalid-input errors map to CLI exit code 2, numerical failures to 1.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// Shortest %g rendering with 6 significant digits, for messages.
std::string format_number(double v);

// Throws BadSector unless 0 < m <= L (both finite).
void require_sector(double m, double L);

}  // namespace imtrack
