#include "imtrack/rate.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "imtrack/csv.hpp"
#include "imtrack/error.hpp"
#include "imtrack/synth.hpp"

namespace imtrack {

double spectral_radius_at(const TransferModel& model, double lambda) {
  if (!std::isfinite(lambda)) throw Error(ErrorCode::InvalidArgument, "lambda must be finite");
  const RealPolynomial cp = char_poly(model, lambda);
  if (cp.degree() < 1) return 0.0;
  try {
    return poly_roots(cp).max_modulus();
  } catch (const Error& e) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " (lambda = %.17g)", lambda);
    throw Error(e.code(), e.detail() + buf);
  }
}

namespace {

// Golden-section search for the maximum of f on [a, b].
RateSample golden_max(const TransferModel& model, double a, double b, double tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = spectral_radius_at(model, c);
  double fd = spectral_radius_at(model, d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = spectral_radius_at(model, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = spectral_radius_at(model, d);
    }
  }
  return fc >= fd ? RateSample{c, fc} : RateSample{d, fd};
}

}  // namespace

RateReport sup_rate(const TransferModel& model, double m, double L, const RateOptions& options,
                    std::optional<int> declared_n) {
  require_sector(m, L);
  if (options.grid < 2 && L > m) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 points");
  RateReport rep;
  const int g = (L > m) ? options.grid : 1;
  rep.samples.resize(g);
  for (int i = 0; i < g; ++i) {
    const double lam = (g == 1) ? m : (i == g - 1 ? L : m + (L - m) * i / (g - 1));
    rep.samples[i] = {lam, spectral_radius_at(model, lam)};
  }
  RateSample best = rep.samples[0];
  for (const auto& s : rep.samples)
    if (s.radius > best.radius) best = s;

  const double tol = options.refine_tolerance * (L - m);
  for (int i = 0; i < g && g > 1; ++i) {
    const double left = i > 0 ? rep.samples[i - 1].radius : -1.0;
    const double right = i + 1 < g ? rep.samples[i + 1].radius : -1.0;
    if (rep.samples[i].radius < left || rep.samples[i].radius < right) continue;
    const double a = rep.samples[std::max(i - 1, 0)].lambda;
    const double b = rep.samples[std::min(i + 1, g - 1)].lambda;
    const RateSample s = golden_max(model, a, b, tol);
    if (s.radius > best.radius) best = s;
  }
  rep.sup_rate = best.radius;
  rep.argmax_lambda = best.lambda;
  rep.stable = rep.sup_rate < 1.0 - kStabilityMargin;
  rep.marginal = std::abs(rep.sup_rate - 1.0) <= kStabilityMargin;
  if (declared_n) {
    rep.declared_n = declared_n;
    rep.bound = rate_lower_bound(m, L, *declared_n);
    rep.meets_bound = rep.sup_rate >= *rep.bound - kBoundTolerance;
  }
  return rep;
}

AlgorithmParams heavy_ball_params(double m, double L) {
  require_sector(m, L);
  const double sl = std::sqrt(L), sm = std::sqrt(m);
  const double hb = (sl - sm) / (sl + sm);
  AlgorithmParams p;
  p.k = 1;
  p.alpha = {4.0 / ((sl + sm) * (sl + sm)), 0.0};
  p.beta = {hb * hb};
  p.m = m;
  p.L = L;
  return p;
}

double rate_lower_bound(double m, double L, int n) { return optimal_rate(m, L, n); }

void to_json(nlohmann::json& j, const RateReport& r) {
  j = nlohmann::json{{"sup_rate", r.sup_rate},
                     {"argmax_lambda", r.argmax_lambda},
                     {"stable", r.stable},
                     {"marginal", r.marginal},
                     {"grid", r.samples.size()}};
  if (r.declared_n) {
    j["declared_n"] = *r.declared_n;
    j["bound"] = *r.bound;
    j["meets_bound"] = r.meets_bound;
  } else {
    j["declared_n"] = nullptr;
    j["bound"] = nullptr;
  }
}

void write_samples_csv(std::ostream& os, const RateReport& r) {
  os << "lambda,spectral_radius\n";
  for (const auto& s : r.samples) os << csv_number(s.lambda) << ',' << csv_number(s.radius) << '\n';
}

}  // namespace imtrack
