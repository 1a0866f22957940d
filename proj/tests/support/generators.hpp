#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "imtrack/algoform.hpp"
#include "imtrack/poly.hpp"

namespace imtrack::testing {

// Monic real polynomial of the given degree whose roots have modulus at most
// max_modulus and real part at most max_real. Coefficients are rounded to
// multiples of 2^-36 so that products with (z-1)^j stay exact in double.
RealPolynomial random_stable_factor(std::mt19937_64& rng, int degree, double max_modulus,
                                    double max_real);

// (z-1)^j * r, coefficient by coefficient in double; exact for factors from
// random_stable_factor with j <= 5.
RealPolynomial times_z_minus_one(const RealPolynomial& r, int j);

// Parameters with the given monic Dtilde and gradient weights.
AlgorithmParams params_from(const RealPolynomial& d_tilde, const std::vector<double>& alpha, double m,
                            double L);

struct BoundInstance {
  AlgorithmParams params;  // m, L are the analysis sector
  int n = 1;               // integrators built into Dtilde
  std::string source;      // "perturbed", "wider", "random"
};

// Stable algorithms with at least n integrators, n <= 3, drawn round-robin from
// perturbed optimal designs, optimal designs for a wider sector or higher
// order, and random stable factors times (z-1)^(n-1) with rejection sampling.
std::vector<BoundInstance> bound_instances(std::uint64_t seed, int count);

struct Condition1Instance {
  AlgorithmParams params;
  int n = 1;
  bool expected = false;  // Dtilde built with at least n-1 roots at 1
};

// Half built with (z-1)^(n-1) in Dtilde, half with a lower power; k <= 10, n <= 5.
std::vector<Condition1Instance> condition1_instances(std::uint64_t seed, int count);

}  // namespace imtrack::testing
