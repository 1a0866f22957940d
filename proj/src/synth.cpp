#include "imtrack/synth.hpp"

#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "imtrack/error.hpp"

namespace imtrack {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using Wide = boost::multiprecision::cpp_bin_float_50;

constexpr double kRouteTolerance = 1e-10;
constexpr double kCancellationTolerance = 1e-8;

double relative_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0, gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(a[i]));
    gap = std::max(gap, std::abs(a[i] - b[i]));
  }
  return scale == 0.0 ? gap : gap / scale;
}

// (z - rho2)^n with the non-leading coefficients rounded to a power-of-two
// grid coarse enough that multiplying by (z-1)^{n-1} is exact in double.
// Returns the grid spacing.
double quantized_stable_factor(const std::vector<Wide>& r, std::vector<double>& out) {
  const int n = static_cast<int>(r.size()) - 1;
  double max_abs = 0.0;
  for (const Wide& c : r) max_abs = std::max(max_abs, std::abs(static_cast<double>(c)));
  const double bound = max_abs * std::ldexp(1.0, n - 1);
  const int e = static_cast<int>(std::ceil(std::log2(bound)));
  const double q = std::ldexp(1.0, e - 50);
  out.assign(n + 1, 1.0);
  for (int i = 0; i < n; ++i) out[i] = static_cast<double>(round(r[i] / q)) * q;
  return q;
}

std::vector<double> times_integrators(const std::vector<double>& r, int count) {
  std::vector<double> c = r;
  for (int i = 0; i < count; ++i) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j + 1] += c[j];
      next[j] -= c[j];
    }
    c = std::move(next);
  }
  return c;
}

bool product_is_exact(const std::vector<double>& r, int count, const std::vector<double>& product) {
  std::vector<Rational> c(r.begin(), r.end());
  for (int i = 0; i < count; ++i) {
    std::vector<Rational> next(c.size() + 1, Rational(0));
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j + 1] += c[j];
      next[j] -= c[j];
    }
    c = std::move(next);
  }
  for (std::size_t j = 0; j < c.size(); ++j)
    if (c[j] != Rational(product[j])) return false;
  return true;
}

void require_order(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "tracking order n must be >= 1");
}

}  // namespace

KTildeConstants ktilde_constants(double m, double L) {
  require_sector(m, L);
  const double sl = std::sqrt(L), sm = std::sqrt(m);
  return {(sl + sm) * (sl + sm) / (4.0 * L * m), (sl - sm) * (sl - sm) / (4.0 * L * m),
          (L + m) / (2.0 * L * m)};
}

double heavy_ball_rate(double m, double L) {
  require_sector(m, L);
  const double sl = std::sqrt(L), sm = std::sqrt(m);
  return (sl - sm) / (sl + sm);
}

double optimal_rate(double m, double L, int n) {
  require_order(n);
  const double hb = heavy_ball_rate(m, L);
  if (hb == 0.0) return 0.0;
  return std::exp(std::log(hb) / n);
}

namespace {

template <class T>
struct Sums {
  std::vector<T> alpha;     // 2n+1 entries, index 0 is the cancelled coefficient
  std::vector<T> beta;      // 2n entries
  std::vector<T> stable;    // (z - rho^2)^n, ascending
};

template <class T>
T int_power(const T& x, int e) {
  T v = 1;
  for (int i = 0; i < e; ++i) v *= x;
  return v;
}

template <class T>
Sums<T> binomial_sums(const T& m, const T& L, int n) {
  using std::exp;
  using std::log;
  using std::sqrt;
  const T sl = sqrt(L), sm = sqrt(m);
  const T k1 = (sl + sm) * (sl + sm) / (4 * L * m);
  const T k2 = (sl - sm) * (sl - sm) / (4 * L * m);
  const T k3 = (L + m) / (2 * L * m);
  const T hb = (sl - sm) / (sl + sm);
  const T p = exp(2 * log(hb) / n);
  auto sgn = [](int e) { return (e % 2 == 0) ? 1 : -1; };
  auto C = [](int a, int b) { return static_cast<T>(static_cast<double>(binomial(a, b))); };

  Sums<T> out;
  out.alpha.resize(2 * n + 1);
  for (int j = 0; j <= 2 * n; ++j) {
    T cross = 0;
    for (int i = std::max(0, j - n); i <= std::min(j, n); ++i)
      cross += C(n, i) * C(n, j - i) * int_power(T(-p), i) * sgn(j - i);
    out.alpha[j] = k1 * C(2 * n, j) * int_power(T(-p), j) + k2 * C(2 * n, j) * sgn(j) - k3 * cross;
  }
  out.beta.resize(2 * n);
  for (int j = 0; j < 2 * n; ++j) {
    T s = 0;
    for (int i = 0; i <= n; ++i) {
      const int e = j + 1 - i;
      if (e < 0 || e > n - 1) continue;
      s += C(n, i) * C(n - 1, e) * int_power(T(-p), i) * sgn(e);
    }
    out.beta[j] = -s;
  }
  out.stable.resize(n + 1);
  for (int j = 0; j <= n; ++j) out.stable[n - j] = C(n, j) * int_power(T(-p), j);
  return out;
}

}  // namespace

BinomialSumCoefficients binomial_sum_coefficients(double m, double L, int n) {
  require_order(n);
  require_sector(m, L);
  if (L == m) throw Error(ErrorCode::DegenerateSector, "L == m: optimal rate is 0");
  Sums<double> s = binomial_sums<double>(m, L, n);
  return {std::move(s.alpha), std::move(s.beta)};
}

SynthesisReport synthesize(double m, double L, int n) {
  require_sector(m, L);
  require_order(n);
  if (L == m) throw Error(ErrorCode::DegenerateSector, "L == m: optimal rate is 0");

  SynthesisReport rep;
  rep.n = n;
  rep.constants = ktilde_constants(m, L);
  rep.rho_hb = heavy_ball_rate(m, L);
  rep.rho = optimal_rate(m, L, n);
  rep.rho_squared = std::exp(2.0 * std::log(rep.rho_hb) / n);
  const double p = rep.rho_squared;
  const int k = 2 * n - 1;

  // Route A: binomial sums.
  const BinomialSumCoefficients a = binomial_sum_coefficients(m, L, n);
  double alpha_scale = 0.0;
  for (double v : a.alpha) alpha_scale = std::max(alpha_scale, std::abs(v));
  rep.cancellation_residual = std::abs(a.alpha[0]);
  if (rep.cancellation_residual > kCancellationTolerance * alpha_scale) {
    throw Error(ErrorCode::IllConditioned,
                "leading coefficient cancellation left " + format_number(rep.cancellation_residual));
  }

  // Route B: polynomial products.
  const RealPolynomial nb = rep.constants.k1 * binomial_expand(p, 2 * n) +
                            rep.constants.k2 * binomial_expand(1.0, 2 * n) -
                            rep.constants.k3 * poly_mul(binomial_expand(p, n), binomial_expand(1.0, n));
  const RealPolynomial db = poly_mul(binomial_expand(p, n), binomial_expand(1.0, n - 1));
  std::vector<double> alpha_a(a.alpha.begin() + 1, a.alpha.end());
  std::vector<double> alpha_b(2 * n), beta_a(a.beta.begin(), a.beta.begin() + k), beta_b(k);
  for (int j = 0; j < 2 * n; ++j) alpha_b[j] = nb.coeff(2 * n - 1 - j);
  for (int j = 0; j < k; ++j) beta_b[j] = -db.coeff(k - j - 1);
  if (db.degree() != k || db.leading() != 1.0) {
    throw Error(ErrorCode::RouteMismatch, "denominator product is not monic of degree 2n-1");
  }

  // Emitted coefficients come from a 50-digit evaluation of the same sums;
  // the double sums above can be off by tens of ulps, enough to lift the
  // worst-case rate measurably at large n and kappa.
  const Sums<Wide> wide = binomial_sums<Wide>(Wide(m), Wide(L), n);
  Wide wide_scale = 0;
  for (const Wide& v : wide.alpha) wide_scale = std::max(wide_scale, Wide(abs(v)));
  std::vector<double> alpha(2 * n);
  for (int j = 0; j < 2 * n; ++j) {
    const Wide& v = wide.alpha[j + 1];
    // coefficients that vanish identically come out at the 1e-50 level
    alpha[j] = abs(v) <= Wide(1e-40) * wide_scale ? 0.0 : static_cast<double>(v);
  }

  // Emitted denominator: stable factor on a coarse grid so that the
  // (z-1)^{n-1} factor, and with it the integrator condition, survives rounding exactly.
  std::vector<double> r;
  rep.model_quantum = quantized_stable_factor(wide.stable, r);
  const std::vector<double> d = times_integrators(r, n - 1);
  if (!product_is_exact(r, n - 1, d)) {
    throw Error(ErrorCode::IllConditioned, "internal model factor not exactly representable");
  }
  std::vector<double> beta(k);
  for (int j = 0; j < k; ++j) beta[j] = -d[k - j - 1];

  rep.route_discrepancy = std::max({relative_gap(alpha_a, alpha_b), relative_gap(beta_a, beta_b),
                                    relative_gap(alpha_a, alpha), relative_gap(beta_a, beta)});
  if (rep.route_discrepancy > kRouteTolerance) {
    throw Error(ErrorCode::RouteMismatch,
                "coefficient routes disagree by " + format_number(rep.route_discrepancy));
  }

  rep.params.k = k;
  rep.params.alpha = alpha;
  rep.params.beta = beta;
  rep.params.m = m;
  rep.params.L = L;
  validate(rep.params);
  return rep;
}

void to_json(nlohmann::json& j, const KTildeConstants& k) {
  j = nlohmann::json{{"k1", k.k1}, {"k2", k.k2}, {"k3", k.k3}};
}

void to_json(nlohmann::json& j, const SynthesisReport& r) {
  j = nlohmann::json{{"params", r.params},
                     {"n", r.n},
                     {"rho", r.rho},
                     {"rho_squared", r.rho_squared},
                     {"rho_hb", r.rho_hb},
                     {"kappa", r.params.kappa()},
                     {"k1", r.constants.k1},
                     {"k2", r.constants.k2},
                     {"k3", r.constants.k3},
                     {"cancellation_residual", r.cancellation_residual},
                     {"route_discrepancy", r.route_discrepancy},
                     {"model_quantum", r.model_quantum}};
}

}  // namespace imtrack
