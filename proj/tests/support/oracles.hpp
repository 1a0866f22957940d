#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "imtrack/algoform.hpp"
#include "imtrack/np.hpp"
#include "imtrack/sim.hpp"

namespace imtrack::testing {

// Block companion matrix of the error recursion for Hessian diag(lambdas),
// state (e(t), e(t-1), ..., e(t-k)); returns its spectral radius.
Eigen::MatrixXd block_companion(const AlgorithmParams& params, const std::vector<double>& lambdas);
double block_companion_radius(const AlgorithmParams& params, const std::vector<double>& lambdas);

// Closed-form Pick determinant for P_ij = 1/(1 - rho^2/((1+e_i)(1+e_j))),
// Q = 1, R = 1 - theta(1)^2, evaluated with 50 significant digits.
double pick_determinant_closed_form(const GainMarginProblem& problem);

// The recursion in original coordinates, x(t+1) = x(t) + sum beta_j (x(t-j) - x(t-j-1))
// - sum alpha_j Delta (x(t-j) - x*(t-j)), carried in long double.
// Returns x(0..T).
std::vector<std::vector<long double>> simulate_original(const AlgorithmParams& params,
                                                        const QuadraticCostSpec& spec, int T,
                                                        const std::vector<Eigen::VectorXd>& init);

// Polynomial particular solution of e(t+1) = (1 - a) e(t) - d(t) where
// d(t) = x*(t+1) - x*(t) for a scalar polynomial optimum with coefficients a_coef:
// e_p = -(1/a) sum_q (-1/a)^q Delta^q d.
double gd_asymptote(double a, const std::vector<double>& a_coef, int t);

// Stirling numbers of the second kind by enumerating restricted growth strings.
std::int64_t stirling2_enumerated(int n, int s);

double central_difference(const std::function<double(double)>& f, double x, double h);

}  // namespace imtrack::testing
