#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace imtrack {

// Dense real polynomial, coefficients in ascending degree. Trailing
// coefficients below kTrimRelative * max|c| are dropped after every
// operation, so degree() is the index of the leading stored coefficient.
class RealPolynomial {
 public:
  static constexpr double kTrimRelative = 1e-14;

  RealPolynomial();  // identically zero
  explicit RealPolynomial(std::vector<double> ascending);
  RealPolynomial(std::initializer_list<double> ascending);

  static RealPolynomial constant(double c);
  static RealPolynomial monomial(int degree, double c = 1.0);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }
  double coeff(int i) const;
  double leading() const { return c_.back(); }
  const std::vector<double>& coeffs() const { return c_; }
  double max_abs_coeff() const;

  double operator()(double z) const;
  std::complex<double> operator()(std::complex<double> z) const;

  RealPolynomial derivative() const;
  // Coefficients of p(z0 + u) in powers of u (Taylor coefficients p^(s)(z0)/s!).
  std::vector<double> taylor_at(double z0) const;

  friend RealPolynomial operator+(const RealPolynomial& a, const RealPolynomial& b);
  friend RealPolynomial operator-(const RealPolynomial& a, const RealPolynomial& b);
  friend RealPolynomial operator*(double s, const RealPolynomial& p);
  friend bool operator==(const RealPolynomial& a, const RealPolynomial& b) = default;

 private:
  void trim();
  std::vector<double> c_;
};

RealPolynomial poly_mul(const RealPolynomial& a, const RealPolynomial& b);
inline RealPolynomial operator*(const RealPolynomial& a, const RealPolynomial& b) {
  return poly_mul(a, b);
}

// (z - c)^n
RealPolynomial binomial_expand(double c, int n);

struct RootCluster {
  std::complex<double> value;
  int multiplicity = 1;
};

struct RootSet {
  std::vector<std::complex<double>> roots;  // one entry per root, degree() entries
  std::vector<RootCluster> clusters;        // nearby roots grouped, multiplicities sum to degree
  double residual = 0.0;                    // max |p(r)| / sum |c_j||r|^j

  double max_modulus() const;
};

struct RootOptions {
  double tolerance = 1e-9;       // accepted scaled residual
  int max_iterations = 0;        // QR sweeps per eigenvalue; 0 means 30 * max(10, degree)
  double cluster_radius = 1e-4;  // relative distance for grouping repeated roots
};

RootSet poly_roots(const RealPolynomial& p, const RootOptions& options = {});

// Default for root_multiplicity_at. An n-fold cluster at rho^2 next to an exact
// n-fold root at 1 contributes (1 - rho^2)^n / max|c|, about 1e-10 at n = 6,
// L/m = 100, so looser values merge the two.
inline constexpr double kMultiplicityTolerance = 1e-12;

// Largest r with |p^(s)(z0)| <= tol * max|c| * s! for all s < r.
int root_multiplicity_at(const RealPolynomial& p, double z0, double tol = kMultiplicityTolerance);

std::int64_t falling_factorial(std::int64_t x, int r);
double falling_factorial_real(double x, int r);
std::int64_t stirling2(int n, int s);
std::int64_t binomial(int n, int k);

// Integer coefficients (ascending) of B_r from B_0 = z,
// B_{r+1} = z (r+1) B_r - z (z-1) B_r'.
std::vector<std::int64_t> br_coefficients(int r);
RealPolynomial br_polynomial(int r);

}  // namespace imtrack
