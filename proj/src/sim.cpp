#include "imtrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/multiprecision/cpp_int.hpp>

#include "imtrack/csv.hpp"
#include "imtrack/error.hpp"

namespace imtrack {

namespace {

using Rational = boost::multiprecision::cpp_rational;

Rational rational_power(const Rational& x, int e) {
  Rational v = 1;
  for (int i = 0; i < e; ++i) v *= x;
  return v;
}

std::vector<Eigen::VectorXd> to_vectors(const std::vector<std::vector<double>>& a) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& v : a) out.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
  return out;
}

void check_init(const AlgorithmParams& params, const QuadraticCostSpec& spec, int T,
                const std::vector<Eigen::VectorXd>& init) {
  validate(params);
  check_spec(spec, params.m, params.L);
  if (T <= params.k) {
    throw Error(ErrorCode::InvalidArgument, "horizon T must exceed k = " + std::to_string(params.k));
  }
  if (init.size() != static_cast<std::size_t>(params.k) + 1) {
    throw Error(ErrorCode::DimensionMismatch, "init must hold k+1 vectors");
  }
  for (const auto& x : init)
    if (x.size() != spec.p) throw Error(ErrorCode::DimensionMismatch, "init vector has wrong dimension");
}

TrajectoryTrace iterate(const AlgorithmParams& params, const QuadraticCostSpec& spec, int T,
                        const std::vector<Eigen::VectorXd>& init, bool forced) {
  const int k = params.k;
  std::vector<std::vector<double>> gamma;
  if (forced) gamma = forcing_coefficients(params, spec.order());

  TrajectoryTrace tr;
  tr.shifted = !forced;
  tr.times.resize(T + 1);
  tr.optima.resize(T + 1);
  for (int t = 0; t <= T; ++t) {
    tr.times[t] = t;
    tr.optima[t] = optimum_at(spec, t);
  }
  std::vector<Eigen::VectorXd> e(T + 1), g(T + 1);
  for (int t = 0; t <= k; ++t) {
    e[t] = init[t] - tr.optima[t];
    g[t] = spec.delta * e[t];
  }
  for (int t = k; t < T; ++t) {
    Eigen::VectorXd next = e[t];
    for (int j = 0; j < k; ++j) next += params.beta[j] * (e[t - j] - e[t - j - 1]);
    for (int j = 0; j <= k; ++j) next -= params.alpha[j] * g[t - j];
    if (forced) {
      for (int i = 1; i < spec.order(); ++i) {
        double s = 0.0;
        for (int q = i - 1; q >= 0; --q) s = s * t + gamma[i][q];
        next += s * spec.a[i];
      }
    }
    const double err = next.norm();
    if (!(err <= kDivergenceThreshold)) {
      throw Error(ErrorCode::Divergence, "error exceeded 1e12 at step " + std::to_string(t + 1));
    }
    e[t + 1] = std::move(next);
    g[t + 1] = spec.delta * e[t + 1];
  }

  tr.iterates.resize(T + 1);
  tr.errors.resize(T + 1);
  for (int t = 0; t <= T; ++t) {
    tr.errors[t] = e[t].norm();
    tr.iterates[t] = forced ? Eigen::VectorXd(tr.optima[t] + e[t]) : e[t];
  }
  tr.fitted_rate = fit_geometric_rate(tr.errors);
  tr.converged_to_floor = !tr.fitted_rate && tr.errors.back() <= kErrorFloor;
  tr.steady_state_error = steady_state_error(tr, default_window(T));
  return tr;
}

}  // namespace

QuadraticCostSpec QuadraticCostSpec::diagonal(const std::vector<double>& diag,
                                              const std::vector<std::vector<double>>& a, double c) {
  QuadraticCostSpec s;
  s.p = static_cast<int>(diag.size());
  s.delta = Eigen::Map<const Eigen::VectorXd>(diag.data(), diag.size()).asDiagonal();
  s.a = to_vectors(a);
  s.c = c;
  return s;
}

QuadraticCostSpec QuadraticCostSpec::full(const Eigen::MatrixXd& delta,
                                          const std::vector<std::vector<double>>& a, double c) {
  QuadraticCostSpec s;
  s.p = static_cast<int>(delta.rows());
  s.delta = delta;
  s.a = to_vectors(a);
  s.c = c;
  return s;
}

void check_spec(const QuadraticCostSpec& spec, double m, double L) {
  require_sector(m, L);
  if (spec.p < 1 || spec.delta.rows() != spec.p || spec.delta.cols() != spec.p) {
    throw Error(ErrorCode::DimensionMismatch, "delta must be p x p");
  }
  if (spec.a.empty()) throw Error(ErrorCode::InvalidArgument, "trajectory needs at least one coefficient");
  for (const auto& v : spec.a)
    if (v.size() != spec.p) throw Error(ErrorCode::DimensionMismatch, "trajectory coefficient has wrong dimension");
  const double scale = std::max(1.0, spec.delta.cwiseAbs().maxCoeff());
  if ((spec.delta - spec.delta.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::InvalidArgument, "delta must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec.delta, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (lo < m - 1e-9 || hi > L + 1e-9) {
    throw Error(ErrorCode::BadSector, "spectrum of delta [" + format_number(lo) + ", " +
                                          format_number(hi) + "] outside [m, L]");
  }
}

Eigen::VectorXd optimum_at(const QuadraticCostSpec& spec, int t) {
  if (t < 0) throw Error(ErrorCode::InvalidArgument, "time must be >= 0");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(spec.p);
  for (int i = spec.order() - 1; i >= 0; --i) x = x * static_cast<double>(t) + spec.a[i];
  return x;
}

Eigen::VectorXd gradient(const QuadraticCostSpec& spec, const Eigen::VectorXd& x, int t) {
  if (x.size() != spec.p) throw Error(ErrorCode::DimensionMismatch, "x has wrong dimension");
  return spec.delta * (x - optimum_at(spec, t));
}

double cost_value(const QuadraticCostSpec& spec, const Eigen::VectorXd& x, int t) {
  if (x.size() != spec.p) throw Error(ErrorCode::DimensionMismatch, "x has wrong dimension");
  const Eigen::VectorXd d = x - optimum_at(spec, t);
  return 0.5 * d.dot(spec.delta * d) + spec.c;
}

std::vector<Eigen::VectorXd> default_init(const AlgorithmParams& params, const QuadraticCostSpec& spec,
                                          const Eigen::VectorXd& offset) {
  if (offset.size() != spec.p) throw Error(ErrorCode::DimensionMismatch, "offset has wrong dimension");
  return std::vector<Eigen::VectorXd>(params.k + 1, optimum_at(spec, 0) + offset);
}

std::vector<Eigen::VectorXd> default_init(const AlgorithmParams& params, const QuadraticCostSpec& spec) {
  return default_init(params, spec, Eigen::VectorXd::Ones(spec.p));
}

std::vector<std::vector<double>> forcing_coefficients(const AlgorithmParams& params, int order) {
  // x*(t+1) - x*(t) is subtracted and sum_j beta_j (x*(t-j) - x*(t-j-1)) added;
  // the t^s coefficient of a_i's contribution is
  //   C(i,s) [ sum_j beta_j ((-j)^{i-s} - (-j-1)^{i-s}) - 1 ],  s < i.
  std::vector<std::vector<double>> gamma(std::max(order, 1));
  std::vector<Rational> beta(params.beta.begin(), params.beta.end());
  for (int i = 1; i < order; ++i) {
    gamma[i].assign(i, 0.0);
    for (int s = 0; s < i; ++s) {
      Rational acc = -1;
      for (std::size_t j = 0; j < beta.size(); ++j) {
        const Rational jj = static_cast<long>(j);
        acc += beta[j] * (rational_power(-jj, i - s) - rational_power(-jj - 1, i - s));
      }
      gamma[i][s] = static_cast<double>(acc * binomial(i, s));
    }
  }
  return gamma;
}

TrajectoryTrace run(const AlgorithmParams& params, const QuadraticCostSpec& spec, int T,
                    const std::vector<Eigen::VectorXd>& init) {
  check_init(params, spec, T, init);
  return iterate(params, spec, T, init, true);
}

TrajectoryTrace run_shifted(const AlgorithmParams& params, const QuadraticCostSpec& spec, int T,
                            const std::vector<Eigen::VectorXd>& init) {
  check_init(params, spec, T, init);
  if (!check_condition1(params, spec.order())) {
    throw Error(ErrorCode::Condition1Violated,
                "params do not satisfy the integrator condition at order " + std::to_string(spec.order()));
  }
  return iterate(params, spec, T, init, false);
}

AlgorithmParams gradient_descent_params(double m, double L) {
  require_sector(m, L);
  AlgorithmParams p;
  p.k = 0;
  p.alpha = {2.0 / (L + m)};
  p.m = m;
  p.L = L;
  return p;
}

double steady_state_error(const TrajectoryTrace& trace, int window) {
  if (window < 1 || static_cast<std::size_t>(window) > trace.errors.size()) {
    throw Error(ErrorCode::InvalidArgument, "window must lie in [1, T+1]");
  }
  double s = 0.0;
  for (std::size_t i = trace.errors.size() - window; i < trace.errors.size(); ++i) s += trace.errors[i];
  return s / window;
}

int default_window(int T) { return std::max(1, T / 10); }

std::optional<double> fit_geometric_rate(std::span<const double> errors) {
  std::vector<std::size_t> idx;
  for (std::size_t t = 0; t < errors.size(); ++t)
    if (errors[t] > kFitLow && errors[t] < kFitHigh) idx.push_back(t);
  const std::size_t use = static_cast<std::size_t>(std::ceil(kFitTailFraction * idx.size()));
  if (use < 3) return std::nullopt;
  const std::size_t first = idx.size() - use;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = first; i < idx.size(); ++i) {
    const double x = static_cast<double>(idx[i]);
    const double y = std::log10(errors[idx[i]]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nn = static_cast<double>(use);
  const double den = nn * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  return std::pow(10.0, (nn * sxy - sx * sy) / den);
}

void write_trace_csv(std::ostream& os, const TrajectoryTrace& trace) {
  const int p = trace.optima.empty() ? 0 : static_cast<int>(trace.optima[0].size());
  os << "t,err";
  for (int i = 0; i < p; ++i) os << ",x_" << i;
  for (int i = 0; i < p; ++i) os << ",xstar_" << i;
  os << '\n';
  for (std::size_t t = 0; t < trace.times.size(); ++t) {
    os << trace.times[t] << ',' << csv_number(trace.errors[t]);
    for (int i = 0; i < p; ++i) os << ',' << csv_number(trace.iterates[t](i));
    for (int i = 0; i < p; ++i) os << ',' << csv_number(trace.optima[t](i));
    os << '\n';
  }
}

}  // namespace imtrack
