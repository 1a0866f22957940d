#include "imtrack/np.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "imtrack/error.hpp"
#include "imtrack/synth.hpp"

namespace imtrack {

namespace {

using Wide = boost::multiprecision::cpp_bin_float_50;

constexpr double kCutTolerance = 1e-12;
constexpr double kSingularTolerance = 1e-14;

Wide wide_determinant(std::vector<std::vector<Wide>> a) {
  const std::size_t n = a.size();
  Wide det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0) return Wide(0);
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const Wide f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

}  // namespace

cplx theta(cplx z, double m, double L) {
  require_sector(m, L);
  if (L > m) {
    const double left = 2.0 * m / (m - L);
    const double right = 2.0 * L / (L - m);
    const double tol = kCutTolerance * std::max(1.0, std::abs(z));
    if (std::abs(z.imag()) <= tol && (z.real() <= left + tol || z.real() > right - tol)) {
      throw Error(ErrorCode::DomainViolation, "theta evaluated on its branch cut");
    }
  }
  const cplx ratio = (1.0 - z * ((L - m) / (2.0 * L))) / (1.0 - z * ((m - L) / (2.0 * m)));
  const cplx w = std::sqrt(ratio);
  return (1.0 - w) / (1.0 + w);
}

cplx theta_inverse(cplx w, double m, double L) {
  require_sector(m, L);
  const cplx den = (L - m) * (L * (w - 1.0) * (w - 1.0) + m * (w + 1.0) * (w + 1.0));
  const double scale = (L - m) * (L + m) * std::max(1.0, std::norm(w));
  if (!(std::abs(den) > kSingularTolerance * scale)) {
    throw Error(ErrorCode::Singularity, "theta_inverse denominator vanishes");
  }
  return 8.0 * L * m * w / den;
}

cplx blaschke_interpolant(cplx z, double rho, int n, double m, double L) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in (0,1)");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  if (std::abs(z) > 1.0 + kCutTolerance) {
    throw Error(ErrorCode::DomainViolation, "Blaschke interpolant is defined on the closed unit disk");
  }
  const double t1 = heavy_ball_rate(m, L);
  const cplx factor = (rho - z) / (1.0 - rho * z);
  return (t1 / std::pow(rho, n)) * std::pow(factor, n);
}

GainMarginProblem GainMarginProblem::with_default_perturbations(double m, double L, int n,
                                                                double rho, double delta) {
  GainMarginProblem p{m, L, n, rho, {}};
  for (int i = 1; i <= n; ++i) p.epsilons.push_back(delta * i);
  return p;
}

PickMatrixReport pick_matrix(const GainMarginProblem& problem) {
  require_sector(problem.m, problem.L);
  if (problem.n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  if (!(problem.rho > 0.0 && problem.rho < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "rho must lie in (0,1)");
  }
  const auto& eps = problem.epsilons;
  if (eps.size() != static_cast<std::size_t>(problem.n)) {
    throw Error(ErrorCode::BadPerturbations, "need exactly n perturbations");
  }
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !std::isfinite(eps[i])) {
      throw Error(ErrorCode::BadPerturbations, "perturbations must be positive");
    }
    for (std::size_t j = 0; j < i; ++j)
      if (eps[i] == eps[j]) throw Error(ErrorCode::BadPerturbations, "perturbations must be distinct");
  }

  const int n = problem.n;
  const Wide rho2 = Wide(problem.rho) * Wide(problem.rho);
  const Wide sl = sqrt(Wide(problem.L)), sm = sqrt(Wide(problem.m));
  const Wide t1 = (sl - sm) / (sl + sm);
  std::vector<std::vector<Wide>> w(n + 1, std::vector<Wide>(n + 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      w[i][j] = 1 / (1 - rho2 / ((1 + Wide(eps[i])) * (1 + Wide(eps[j]))));
    w[i][n] = 1;
    w[n][i] = 1;
  }
  w[n][n] = 1 - t1 * t1;

  PickMatrixReport rep;
  rep.matrix.resize(n + 1, n + 1);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) rep.matrix(i, j) = static_cast<double>(w[i][j]);
  rep.determinant = static_cast<double>(wide_determinant(w));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rep.matrix, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  rep.min_eigenvalue = ev.minCoeff();
  const double norm = ev.cwiseAbs().maxCoeff();
  rep.feasible = rep.min_eigenvalue >= -kPsdTolerance * norm;
  return rep;
}

double feasibility_limit(double rho, int n, double m, double L) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in (0,1)");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  const double t1 = heavy_ball_rate(m, L);
  const double denominator = std::exp(static_cast<double>(n) * n * std::log1p(-rho * rho));
  if (t1 == 0.0) return std::pow(rho, 2 * n) / denominator;
  // rho^{2n} - t1^2 = t1^2 (exp(2 diff) - 1), diff = n log rho - log t1
  const double diff = n * std::log(rho) - std::log(t1);
  const double eps = std::numeric_limits<double>::epsilon();
  if (std::abs(diff) <= 4.0 * eps * (n + std::abs(std::log(t1)))) return 0.0;
  return t1 * t1 * std::expm1(2.0 * diff) / denominator;
}

void to_json(nlohmann::json& j, const PickMatrixReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.matrix.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < r.matrix.cols(); ++c) row.push_back(r.matrix(i, c));
    rows.push_back(row);
  }
  j = nlohmann::json{{"matrix", rows},
                     {"min_eigenvalue", r.min_eigenvalue},
                     {"determinant", r.determinant},
                     {"feasible", r.feasible}};
}

}  // namespace imtrack
