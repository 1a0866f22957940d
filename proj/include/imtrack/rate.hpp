#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "json.hpp"
#include "imtrack/algoform.hpp"

namespace imtrack {

struct RateSample {
  double lambda = 0.0;
  double radius = 0.0;
};

struct RateOptions {
  int grid = 2001;
  double refine_tolerance = 1e-9;  // relative to L - m
};

inline constexpr double kStabilityMargin = 1e-9;
inline constexpr double kBoundTolerance = 1e-6;

struct RateReport {
  double sup_rate = 0.0;
  double argmax_lambda = 0.0;
  std::vector<RateSample> samples;  // the uniform grid, before refinement
  std::optional<int> declared_n;
  std::optional<double> bound;
  bool meets_bound = true;
  bool stable = false;    // sup_rate < 1 - kStabilityMargin
  bool marginal = false;  // within kStabilityMargin of 1
};

// Largest root modulus of (z-1) Dtilde(z) + lambda Ntilde(z).
double spectral_radius_at(const TransferModel& model, double lambda);

RateReport sup_rate(const TransferModel& model, double m, double L, const RateOptions& options = {},
                    std::optional<int> declared_n = std::nullopt);

AlgorithmParams heavy_ball_params(double m, double L);

// Lower bound on the worst-case rate of any algorithm with n integrators.
double rate_lower_bound(double m, double L, int n);

void to_json(nlohmann::json& j, const RateReport& r);
void write_samples_csv(std::ostream& os, const RateReport& r);

}  // namespace imtrack
