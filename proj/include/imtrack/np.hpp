#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace imtrack {

using cplx = std::complex<double>;

// Conformal map of the plane minus the branch cut
// (-inf, 2m/(m-L)] U (2L/(L-m), inf) onto the unit disk, principal branch.
cplx theta(cplx z, double m, double L);
cplx theta_inverse(cplx w, double m, double L);

// (theta(1)/rho^n) ((rho - z)/(1 - rho z))^n
cplx blaschke_interpolant(cplx z, double rho, int n, double m, double L);

struct GainMarginProblem {
  double m = 1.0;
  double L = 1.0;
  int n = 1;
  double rho = 0.5;
  std::vector<double> epsilons;

  // epsilons = delta * (1, 2, ..., n)
  static GainMarginProblem with_default_perturbations(double m, double L, int n, double rho,
                                                      double delta = 1e-3);
};

struct PickMatrixReport {
  Eigen::MatrixXd matrix;  // [[P, 1], [1^T, 1 - theta(1)^2]]
  double min_eigenvalue = 0.0;
  double determinant = 0.0;  // evaluated with 50 significant digits, then rounded
  bool feasible = false;     // min_eigenvalue >= -kPsdTolerance * ||M||
};

inline constexpr double kPsdTolerance = 1e-10;

PickMatrixReport pick_matrix(const GainMarginProblem& problem);

// (rho^{2n} - theta(1)^2) / (1 - rho^2)^{n^2}. Exactly 0 when rho^n and
// theta(1) agree to within the rounding of the inputs.
double feasibility_limit(double rho, int n, double m, double L);

void to_json(nlohmann::json& j, const PickMatrixReport& r);

}  // namespace imtrack
