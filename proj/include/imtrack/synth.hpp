#pragma once

#include <vector>

#include "json.hpp"
#include "imtrack/algoform.hpp"

namespace imtrack {

struct KTildeConstants {
  double k1 = 0.0;  // (sqrt L + sqrt m)^2 / (4 L m)
  double k2 = 0.0;  // (sqrt L - sqrt m)^2 / (4 L m)
  double k3 = 0.0;  // (L + m) / (2 L m)
};

struct SynthesisReport {
  AlgorithmParams params;
  int n = 0;
  double rho = 0.0;
  double rho_squared = 0.0;
  double rho_hb = 0.0;
  KTildeConstants constants;
  double cancellation_residual = 0.0;  // realized value of the cancelled z^{2n} coefficient
  double route_discrepancy = 0.0;      // max relative gap between the two coefficient routes
  double model_quantum = 0.0;          // grid the stable factor of Dtilde was rounded to
};

KTildeConstants ktilde_constants(double m, double L);

// (sqrt L - sqrt m) / (sqrt L + sqrt m)
double heavy_ball_rate(double m, double L);

// heavy_ball_rate^(1/n); returns 0 for L == m.
double optimal_rate(double m, double L, int n);

// Coefficients straight from the binomial-sum formulas, including the
// cancelled leading alpha: alpha has 2n+1 entries, beta has 2n.
struct BinomialSumCoefficients {
  std::vector<double> alpha;
  std::vector<double> beta;
};
BinomialSumCoefficients binomial_sum_coefficients(double m, double L, int n);

SynthesisReport synthesize(double m, double L, int n);

void to_json(nlohmann::json& j, const KTildeConstants& k);
void to_json(nlohmann::json& j, const SynthesisReport& r);

}  // namespace imtrack
