#include "imtrack/algoform.hpp"

#include <algorithm>
#include <cmath>

#include "imtrack/error.hpp"

namespace imtrack {

void validate(const AlgorithmParams& params) {
  require_sector(params.m, params.L);
  if (params.k < 0) throw Error(ErrorCode::LengthMismatch, "k must be >= 0");
  if (params.alpha.size() != static_cast<std::size_t>(params.k) + 1 ||
      params.beta.size() != static_cast<std::size_t>(params.k)) {
    throw Error(ErrorCode::LengthMismatch,
                "expected " + std::to_string(params.k + 1) + " alphas and " +
                    std::to_string(params.k) + " betas, got " +
                    std::to_string(params.alpha.size()) + " and " +
                    std::to_string(params.beta.size()));
  }
  for (double v : params.alpha)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite alpha");
  for (double v : params.beta)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite beta");
  double sum = 0.0;
  for (double v : params.alpha) sum += v;
  if (sum == 0.0) throw Error(ErrorCode::ZeroAlphaSum, "sum of alpha is zero");
}

bool check_condition1(const AlgorithmParams& params, int n, double tol) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "order n must be >= 1");
  double beta_scale = 1.0;
  for (double b : params.beta) beta_scale = std::max(beta_scale, std::abs(b));
  double factorial = 1.0;
  for (int r = 0; r <= n - 2; ++r) {
    if (r > 0) factorial *= r;
    for (int kh = params.k; kh <= params.k + n; ++kh) {
      double lhs = 0.0;
      for (int j = 0; j < params.k; ++j)
        lhs += params.beta[j] * falling_factorial_real(kh - j - 1, r);
      const double rhs = falling_factorial_real(kh, r);
      if (std::abs(lhs - rhs) > tol * factorial * beta_scale) return false;
    }
  }
  return true;
}

TransferModel build_transfer(const AlgorithmParams& params) {
  validate(params);
  const int k = params.k;
  std::vector<double> d(static_cast<std::size_t>(k) + 1, 0.0);
  d[k] = 1.0;
  for (int j = 0; j < k; ++j) d[k - j - 1] = -params.beta[j];
  std::vector<double> nt(static_cast<std::size_t>(k) + 1, 0.0);
  for (int j = 0; j <= k; ++j) nt[k - j] = params.alpha[j];
  TransferModel model{RealPolynomial(std::move(nt)), RealPolynomial(std::move(d)), {}};
  model.d_full = poly_mul(RealPolynomial({-1.0, 1.0}), model.d_tilde);
  return model;
}

AlgorithmParams recover_params(const TransferModel& model, double m, double L) {
  AlgorithmParams p;
  p.k = model.d_tilde.degree();
  p.m = m;
  p.L = L;
  if (model.d_tilde.leading() != 1.0) throw Error(ErrorCode::InvalidArgument, "Dtilde is not monic");
  if (model.n_tilde.degree() > p.k) throw Error(ErrorCode::LengthMismatch, "deg Ntilde exceeds deg Dtilde");
  p.alpha.resize(static_cast<std::size_t>(p.k) + 1);
  for (int j = 0; j <= p.k; ++j) p.alpha[j] = model.n_tilde.coeff(p.k - j);
  p.beta.resize(static_cast<std::size_t>(p.k));
  for (int j = 0; j < p.k; ++j) p.beta[j] = -model.d_tilde.coeff(p.k - j - 1);
  validate(p);
  return p;
}

RealPolynomial char_poly(const TransferModel& model, double lambda) {
  return model.d_full + lambda * model.n_tilde;
}

int integrator_count(const TransferModel& model, double tol) {
  return root_multiplicity_at(model.d_full, 1.0, tol);
}

void to_json(nlohmann::json& j, const AlgorithmParams& p) {
  j = nlohmann::json{{"k", p.k}, {"alpha", p.alpha}, {"beta", p.beta}, {"m", p.m}, {"L", p.L}};
}

void from_json(const nlohmann::json& j, AlgorithmParams& p) {
  for (const char* key : {"k", "alpha", "beta", "m", "L"}) {
    if (!j.contains(key)) throw Error(ErrorCode::InvalidConfig, std::string("params: missing field '") + key + "'");
  }
  try {
    p.k = j.at("k").get<int>();
    p.alpha = j.at("alpha").get<std::vector<double>>();
    p.beta = j.at("beta").get<std::vector<double>>();
    p.m = j.at("m").get<double>();
    p.L = j.at("L").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("params: ") + e.what());
  }
  validate(p);
}

}  // namespace imtrack
