#include "imtrack/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "imtrack/error.hpp"

namespace imtrack {

namespace {

using cd = std::complex<double>;
using Matrix = std::vector<std::vector<double>>;

// Parlett-Reinsch balancing with radix 2 (exact in binary arithmetic).
void balance(Matrix& a) {
  const int n = static_cast<int>(a.size());
  const double radix = 2.0;
  const double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) {
          c += std::abs(a[j][i]);
          r += std::abs(a[i][j]);
        }
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (int j = 0; j < n; ++j) a[i][j] *= g;
        for (int j = 0; j < n; ++j) a[j][i] *= f;
      }
    }
  }
}

double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

// Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR
// (EISPACK hqr). The matrix is destroyed.
std::vector<cd> hessenberg_eigenvalues(Matrix& a, int max_iterations) {
  const int n = static_cast<int>(a.size());
  std::vector<cd> wri(n);
  const double eps = std::numeric_limits<double>::epsilon();
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a[i][j]);

  int nn = n - 1;
  double t = 0.0;
  double p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l > 0; --l) {
        s = std::abs(a[l - 1][l - 1]) + std::abs(a[l][l]);
        if (s == 0.0) s = anorm;
        if (std::abs(a[l][l - 1]) <= eps * s) {
          a[l][l - 1] = 0.0;
          break;
        }
      }
      x = a[nn][nn];
      if (l == nn) {
        wri[nn--] = x + t;
      } else {
        y = a[nn - 1][nn - 1];
        w = a[nn][nn - 1] * a[nn - 1][nn];
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            wri[nn - 1] = wri[nn] = x + z;
            if (z != 0.0) wri[nn] = x - w / z;
          } else {
            wri[nn] = cd(x + p, -z);
            wri[nn - 1] = std::conj(wri[nn]);
          }
          nn -= 2;
        } else {
          if (its == max_iterations) {
            throw Error(ErrorCode::NonConvergence, "QR iteration cap reached in root finder");
          }
          if (its > 0 && its % 10 == 0) {
            // exceptional shift
            t += x;
            for (int i = 0; i <= nn; ++i) a[i][i] -= x;
            s = std::abs(a[nn][nn - 1]) + std::abs(a[nn - 1][nn - 2]);
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a[m][m];
            r = x - z;
            s = y - z;
            p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
            q = a[m + 1][m + 1] - z - r - s;
            r = a[m + 2][m + 1];
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a[m][m - 1]) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) * (std::abs(a[m - 1][m - 1]) + std::abs(z) + std::abs(a[m + 1][m + 1]));
            if (u <= eps * v) break;
          }
          for (int i = m; i < nn - 1; ++i) {
            a[i + 2][i] = 0.0;
            if (i != m) a[i + 2][i - 1] = 0.0;
          }
          for (int k = m; k < nn; ++k) {
            if (k != m) {
              p = a[k][k - 1];
              q = a[k + 1][k - 1];
              r = 0.0;
              if (k + 1 != nn) r = a[k + 2][k - 1];
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = sign_of(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
              if (k == m) {
                if (l != m) a[k][k - 1] = -a[k][k - 1];
              } else {
                a[k][k - 1] = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a[k][j] + q * a[k + 1][j];
                if (k + 1 != nn) {
                  p += r * a[k + 2][j];
                  a[k + 2][j] -= p * z;
                }
                a[k + 1][j] -= p * y;
                a[k][j] -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a[i][k] + y * a[i][k + 1];
                if (k + 1 != nn) {
                  p += z * a[i][k + 2];
                  a[i][k + 2] -= p * r;
                }
                a[i][k + 1] -= p * q;
                a[i][k] -= p;
              }
            }
          }
        }
      }
    } while (l + 1 < nn);
  }
  return wri;
}

void horner_with_derivative(const std::vector<double>& c, cd z, cd& value, cd& deriv) {
  value = c.back();
  deriv = 0.0;
  for (int i = static_cast<int>(c.size()) - 2; i >= 0; --i) {
    deriv = deriv * z + value;
    value = value * z + c[i];
  }
}

double scaled_residual(const std::vector<double>& c, cd z) {
  cd value = c.back();
  double scale = std::abs(c.back());
  const double az = std::abs(z);
  for (int i = static_cast<int>(c.size()) - 2; i >= 0; --i) {
    value = value * z + c[i];
    scale = scale * az + std::abs(c[i]);
  }
  return scale == 0.0 ? 0.0 : std::abs(value) / scale;
}

cd polish(const std::vector<double>& c, cd z) {
  cd value, deriv;
  horner_with_derivative(c, z, value, deriv);
  double best = std::abs(value);
  for (int it = 0; it < 10 && best > 0.0; ++it) {
    if (deriv == 0.0) break;
    const cd candidate = z - value / deriv;
    cd v2, d2;
    horner_with_derivative(c, candidate, v2, d2);
    if (!(std::abs(v2) < best)) break;
    z = candidate;
    value = v2;
    deriv = d2;
    best = std::abs(v2);
  }
  return z;
}

}  // namespace

RealPolynomial::RealPolynomial() : c_{0.0} {}

RealPolynomial::RealPolynomial(std::vector<double> ascending) : c_(std::move(ascending)) {
  if (c_.empty()) c_.push_back(0.0);
  trim();
}

RealPolynomial::RealPolynomial(std::initializer_list<double> ascending)
    : RealPolynomial(std::vector<double>(ascending)) {}

RealPolynomial RealPolynomial::constant(double c) { return RealPolynomial({c}); }

RealPolynomial RealPolynomial::monomial(int degree, double c) {
  std::vector<double> v(static_cast<std::size_t>(degree) + 1, 0.0);
  v.back() = c;
  return RealPolynomial(std::move(v));
}

double RealPolynomial::coeff(int i) const {
  return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[i] : 0.0;
}

double RealPolynomial::max_abs_coeff() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

void RealPolynomial::trim() {
  const double threshold = kTrimRelative * max_abs_coeff();
  while (c_.size() > 1 && std::abs(c_.back()) <= threshold) c_.pop_back();
  if (c_.size() == 1 && std::abs(c_[0]) == 0.0) c_[0] = 0.0;
}

double RealPolynomial::operator()(double z) const {
  double v = c_.back();
  for (int i = degree() - 1; i >= 0; --i) v = v * z + c_[i];
  return v;
}

std::complex<double> RealPolynomial::operator()(std::complex<double> z) const {
  std::complex<double> v = c_.back();
  for (int i = degree() - 1; i >= 0; --i) v = v * z + c_[i];
  return v;
}

RealPolynomial RealPolynomial::derivative() const {
  if (degree() == 0) return RealPolynomial();
  std::vector<double> d(c_.size() - 1);
  for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
  return RealPolynomial(std::move(d));
}

std::vector<double> RealPolynomial::taylor_at(double z0) const {
  std::vector<double> b = c_;
  const int d = degree();
  for (int k = 0; k < d; ++k)
    for (int j = d - 1; j >= k; --j) b[j] += z0 * b[j + 1];
  return b;
}

RealPolynomial operator+(const RealPolynomial& a, const RealPolynomial& b) {
  std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
  for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
  return RealPolynomial(std::move(c));
}

RealPolynomial operator-(const RealPolynomial& a, const RealPolynomial& b) {
  return a + (-1.0) * b;
}

RealPolynomial operator*(double s, const RealPolynomial& p) {
  std::vector<double> c = p.c_;
  for (double& v : c) v *= s;
  return RealPolynomial(std::move(c));
}

RealPolynomial poly_mul(const RealPolynomial& a, const RealPolynomial& b) {
  const auto& x = a.coeffs();
  const auto& y = b.coeffs();
  std::vector<double> c(x.size() + y.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) c[i + j] += x[i] * y[j];
  return RealPolynomial(std::move(c));
}

RealPolynomial binomial_expand(double c, int n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "binomial_expand needs n >= 0");
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  double power = 1.0;  // (-c)^j
  for (int j = 0; j <= n; ++j) {
    v[n - j] = static_cast<double>(binomial(n, j)) * power;
    power *= -c;
  }
  return RealPolynomial(std::move(v));
}

double RootSet::max_modulus() const {
  double m = 0.0;
  for (const auto& r : roots) m = std::max(m, std::abs(r));
  return m;
}

RootSet poly_roots(const RealPolynomial& p, const RootOptions& options) {
  if (p.degree() < 1) throw Error(ErrorCode::InvalidArgument, "poly_roots needs degree >= 1");
  const auto& c = p.coeffs();
  RootSet out;

  // exact zero roots
  int zeros = 0;
  while (c[zeros] == 0.0) ++zeros;
  for (int i = 0; i < zeros; ++i) out.roots.emplace_back(0.0, 0.0);
  std::vector<double> q(c.begin() + zeros, c.end());
  const int d = static_cast<int>(q.size()) - 1;

  std::vector<cd> found;
  if (d == 1) {
    found.emplace_back(-q[0] / q[1], 0.0);
  } else if (d >= 2) {
    Matrix a(d, std::vector<double>(d, 0.0));
    for (int j = 0; j < d; ++j) a[0][j] = -q[d - 1 - j] / q[d];
    for (int i = 1; i < d; ++i) a[i][i - 1] = 1.0;
    balance(a);
    const int cap = options.max_iterations > 0 ? options.max_iterations : 30 * std::max(10, d);
    found = hessenberg_eigenvalues(a, cap);
  }

  for (const cd& r : found) {
    if (r.imag() < 0.0) continue;
    const cd polished = polish(c, r);
    if (r.imag() == 0.0) {
      out.roots.emplace_back(polished.real(), 0.0);
    } else {
      out.roots.push_back(polished);
      out.roots.push_back(std::conj(polished));
    }
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const cd& x, const cd& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });

  out.residual = 0.0;
  for (const cd& r : out.roots) out.residual = std::max(out.residual, scaled_residual(c, r));
  if (static_cast<int>(out.roots.size()) != p.degree() || !(out.residual <= options.tolerance)) {
    throw Error(ErrorCode::NonConvergence,
                "root residual " + format_number(out.residual) + " above tolerance");
  }

  // single-linkage grouping of near-coincident roots
  const std::size_t nr = out.roots.size();
  std::vector<int> group(nr);
  std::iota(group.begin(), group.end(), 0);
  auto find = [&](int i) {
    while (group[i] != i) i = group[i] = group[group[i]];
    return i;
  };
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = i + 1; j < nr; ++j) {
      const double radius =
          options.cluster_radius * std::max(1.0, std::abs(out.roots[i]));
      if (std::abs(out.roots[i] - out.roots[j]) <= radius) group[find(j)] = find(i);
    }
  }
  for (std::size_t i = 0; i < nr; ++i) {
    if (find(static_cast<int>(i)) != static_cast<int>(i)) continue;
    RootCluster cl{cd(0.0, 0.0), 0};
    for (std::size_t j = 0; j < nr; ++j) {
      if (find(static_cast<int>(j)) == static_cast<int>(i)) {
        cl.value += out.roots[j];
        ++cl.multiplicity;
      }
    }
    cl.value /= static_cast<double>(cl.multiplicity);
    out.clusters.push_back(cl);
  }
  return out;
}

int root_multiplicity_at(const RealPolynomial& p, double z0, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (p.is_zero()) return 0;
  const double scale = p.max_abs_coeff();
  const std::vector<double> t = p.taylor_at(z0);
  int r = 0;
  while (r < p.degree() && std::abs(t[r]) <= tol * scale) ++r;
  return r;
}

std::int64_t falling_factorial(std::int64_t x, int r) {
  if (r < 0) throw Error(ErrorCode::InvalidArgument, "falling factorial order must be >= 0");
  std::int64_t v = 1;
  for (int i = 0; i < r; ++i) v *= (x - i);
  return v;
}

double falling_factorial_real(double x, int r) {
  if (r < 0) throw Error(ErrorCode::InvalidArgument, "falling factorial order must be >= 0");
  double v = 1.0;
  for (int i = 0; i < r; ++i) v *= (x - i);
  return v;
}

std::int64_t stirling2(int n, int s) {
  if (n < 0 || s < 0 || s > n) throw Error(ErrorCode::InvalidArgument, "stirling2 needs 0 <= s <= n");
  std::vector<std::int64_t> row(static_cast<std::size_t>(n) + 1, 0);
  row[0] = 1;  // S(0,0)
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j >= 1; --j) row[j] = j * row[j] + row[j - 1];
    row[0] = 0;
  }
  return row[s];
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t v = 1;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

std::vector<std::int64_t> br_coefficients(int r) {
  if (r < 0) throw Error(ErrorCode::InvalidArgument, "br_polynomial needs r >= 0");
  std::vector<std::int64_t> b{0, 1};
  for (int k = 0; k < r; ++k) {
    std::vector<std::int64_t> next(b.size() + 1, 0);
    for (std::size_t i = 0; i < b.size(); ++i) next[i + 1] += (k + 1) * b[i];
    // - (z^2 - z) B'
    for (std::size_t i = 1; i < b.size(); ++i) {
      const std::int64_t d = static_cast<std::int64_t>(i) * b[i];  // coefficient of z^{i-1} in B'
      next[i + 1] -= d;
      next[i] += d;
    }
    while (next.size() > 1 && next.back() == 0) next.pop_back();
    b = std::move(next);
  }
  return b;
}

RealPolynomial br_polynomial(int r) {
  const auto b = br_coefficients(r);
  std::vector<double> c(b.begin(), b.end());
  return RealPolynomial(std::move(c));
}

}  // namespace imtrack
