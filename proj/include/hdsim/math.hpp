#pragma once

#include <cstdint>
#include <vector>

#include "hdsim/types.hpp"

namespace hdsim {

// log(n!) via lgamma; exact for the double-representable range.
double log_factorial(int n);

// Binomial coefficient C(n,k) computed in log space; n up to ~1e4.
double binomial(int n, int k);

// Numerically careful sum: pairwise/tree reduction, deterministic order.
double pairwise_sum(const std::vector<double>& v);
cxd pairwise_sum(const std::vector<cxd>& v);

// Gauss-Hermite rule for weight e^{-t^2} on (-inf, inf): nodes and weights
// via the symmetric-tridiagonal (Golub-Welsch) eigenproblem.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermiteRule gauss_hermite(int n);

// 1 - e^{iphi} evaluated as 2 sin^2(phi/2) - i sin(phi), stable for small phi.
cxd one_minus_exp_i(double phi);

// Smallest count bound whose Poisson(mean) upper tail is below tol.
int poisson_tail_bound(double mean, double tol);

// 64-bit splittable seed stream (splitmix64); used to derive independent
// RNG seeds for workers and detectors from one user seed.
std::uint64_t splitmix64_next(std::uint64_t& state);

}  // namespace hdsim
