#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "imtrack/algoform.hpp"

namespace imtrack {

// f(x, t) = 1/2 (x - x*(t))^T Delta (x - x*(t)) + c with
// x*(t) = a_0 + a_1 t + ... + a_{n-1} t^{n-1}.
struct QuadraticCostSpec {
  int p = 1;
  Eigen::MatrixXd delta;
  std::vector<Eigen::VectorXd> a;
  double c = 0.0;

  static QuadraticCostSpec diagonal(const std::vector<double>& diag,
                                    const std::vector<std::vector<double>>& a, double c = 0.0);
  static QuadraticCostSpec full(const Eigen::MatrixXd& delta,
                                const std::vector<std::vector<double>>& a, double c = 0.0);

  int order() const { return static_cast<int>(a.size()); }
};

// Throws unless dimensions agree, Delta is symmetric and m I <= Delta <= L I within 1e-9.
void check_spec(const QuadraticCostSpec& spec, double m, double L);

struct TrajectoryTrace {
  std::vector<int> times;
  std::vector<Eigen::VectorXd> iterates;  // x(t), or x(t) - x*(t) for a shifted run
  std::vector<Eigen::VectorXd> optima;    // x*(t)
  std::vector<double> errors;             // |x(t) - x*(t)|
  std::optional<double> fitted_rate;
  bool converged_to_floor = false;
  double steady_state_error = 0.0;
  bool shifted = false;
};

inline constexpr double kDivergenceThreshold = 1e12;
inline constexpr double kErrorFloor = 1e-13;
inline constexpr double kFitLow = 1e-12;
inline constexpr double kFitHigh = 1e-2;
inline constexpr double kFitTailFraction = 0.4;

Eigen::VectorXd optimum_at(const QuadraticCostSpec& spec, int t);
Eigen::VectorXd gradient(const QuadraticCostSpec& spec, const Eigen::VectorXd& x, int t);
double cost_value(const QuadraticCostSpec& spec, const Eigen::VectorXd& x, int t);

// x(0..k) = x*(0) + offset
std::vector<Eigen::VectorXd> default_init(const AlgorithmParams& params, const QuadraticCostSpec& spec,
                                          const Eigen::VectorXd& offset);
std::vector<Eigen::VectorXd> default_init(const AlgorithmParams& params, const QuadraticCostSpec& spec);

TrajectoryTrace run(const AlgorithmParams& params, const QuadraticCostSpec& spec, int T,
                    const std::vector<Eigen::VectorXd>& init);

// Time-invariant recursion in x - x*(t); requires the integrator condition (check_condition1) at the cost order.
TrajectoryTrace run_shifted(const AlgorithmParams& params, const QuadraticCostSpec& spec, int T,
                            const std::vector<Eigen::VectorXd>& init);

AlgorithmParams gradient_descent_params(double m, double L);

double steady_state_error(const TrajectoryTrace& trace, int window);
int default_window(int T);

// Least squares on log10 errors: of the steps whose error lies in
// (kFitLow, kFitHigh), the final kFitTailFraction are used.
std::optional<double> fit_geometric_rate(std::span<const double> errors);

// Per-step forcing polynomial coefficients gamma[i][s] (t^s coefficient
// contributed by a_i) of the deviation recursion, computed exactly.
std::vector<std::vector<double>> forcing_coefficients(const AlgorithmParams& params, int order);

void write_trace_csv(std::ostream& os, const TrajectoryTrace& trace);

}  // namespace imtrack
