#pragma once

#include <vector>

#include "json.hpp"
#include "imtrack/poly.hpp"

namespace imtrack {

// One instance of the recursion
//   x(t+1) = x(t) + sum_{j<k} beta_j (x(t-j) - x(t-j-1)) - sum_{j<=k} alpha_j grad f(x(t-j), t-j)
// on costs whose Hessian spectrum lies in [m, L].
struct AlgorithmParams {
  int k = 0;
  std::vector<double> alpha;  // k+1 gradient weights
  std::vector<double> beta;   // k momentum weights
  double m = 1.0;
  double L = 1.0;

  double kappa() const { return L / m; }
  friend bool operator==(const AlgorithmParams&, const AlgorithmParams&) = default;
};

// Ntilde(z) = sum alpha_j z^{k-j}, Dtilde(z) = z^k - sum beta_j z^{k-j-1},
// D(z) = (z-1) Dtilde(z).
struct TransferModel {
  RealPolynomial n_tilde;
  RealPolynomial d_tilde;
  RealPolynomial d_full;
};

inline constexpr double kCondition1Tolerance = 1e-7;

void validate(const AlgorithmParams& params);

// Sum_j beta_j (kh-j-1)_r == (kh)_r for 0 <= r <= n-2, tested at kh = k..k+n.
// Both sides are polynomials of degree <= n-2 in kh, so the finite witness set
// is equivalent to the identity for every kh >= k.
bool check_condition1(const AlgorithmParams& params, int n, double tol = kCondition1Tolerance);

TransferModel build_transfer(const AlgorithmParams& params);
AlgorithmParams recover_params(const TransferModel& model, double m, double L);

// (z-1) Dtilde(z) + lambda Ntilde(z)
RealPolynomial char_poly(const TransferModel& model, double lambda);

// Multiplicity of z = 1 as a root of D(z).
int integrator_count(const TransferModel& model, double tol = kMultiplicityTolerance);

void to_json(nlohmann::json& j, const AlgorithmParams& p);
void from_json(const nlohmann::json& j, AlgorithmParams& p);

}  // namespace imtrack
