#include "hdsim/math.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace hdsim {

double log_factorial(int n) {
  if (n < 0) throw DomainError("log_factorial: negative argument");
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (k == 0 || k == n) return 1.0;
  return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
}

namespace {
template <typename T>
T pairwise_sum_range(const std::vector<T>& v, size_t lo, size_t hi) {
  const size_t n = hi - lo;
  if (n == 0) return T{};
  if (n <= 8) {
    T acc{};
    for (size_t i = lo; i < hi; ++i) acc += v[i];
    return acc;
  }
  const size_t mid = lo + n / 2;
  return pairwise_sum_range(v, lo, mid) + pairwise_sum_range(v, mid, hi);
}
}  // namespace

double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum_range(v, 0, v.size());
}

cxd pairwise_sum(const std::vector<cxd>& v) {
  return pairwise_sum_range(v, 0, v.size());
}

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw DomainError("gauss_hermite: need at least one node");
  // Jacobi matrix of the (physicists') Hermite recurrence: zero diagonal,
  // off-diagonal beta_k = sqrt(k/2).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(0.5 * k);
    J(k - 1, k) = b;
    J(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mu0 = std::sqrt(M_PI);  // integral of e^{-t^2}
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

cxd one_minus_exp_i(double phi) {
  const double s = std::sin(0.5 * phi);
  return cxd(2.0 * s * s, -std::sin(phi));
}

int poisson_tail_bound(double mean, double tol) {
  if (mean < 0.0) throw DomainError("poisson_tail_bound: negative mean");
  if (!(tol > 0.0)) throw DomainError("poisson_tail_bound: tol must be > 0");
  if (mean == 0.0) return 0;
  const double log_tol = std::log(tol);
  const int start = std::max(8, static_cast<int>(std::ceil(2.0 * mean)));
  double log_term = -mean;  // log P(0)
  for (int k = 1; k <= 2000000; ++k) {
    log_term += std::log(mean) - std::log(static_cast<double>(k));
    // Past twice the mean consecutive terms at least halve, so the tail
    // beyond k-1 is bounded by twice the k-th term; log-space evaluation
    // keeps the test meaningful for tolerances far below double epsilon.
    if (k >= start && log_term + M_LN2 < log_tol) return k - 1;
  }
  throw TruncationInsufficient("poisson_tail_bound: count bound too large");
}

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace hdsim
