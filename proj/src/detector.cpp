#include "hdsim/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hdsim/fock.hpp"
#include "hdsim/math.hpp"

namespace hdsim {

RVec povm_element_diagonal(Efficiency eps, int n,
                           const TruncationBudget& budget) {
  eps.validate();
  budget.validate();
  if (n < 0) throw DomainError("count must be >= 0");
  RVec d = RVec::Zero(budget.dim());
  if (eps.ideal()) {
    // Projector onto |n><n|: exact branch, no 0^0 ambiguity.
    if (n <= budget.cutoff) d(n) = 1.0;
    return d;
  }
  const double e = eps.value;
  const double log_e = std::log(e);
  const double log_1me = std::log1p(-e);
  for (int m = n; m <= budget.cutoff; ++m) {
    const double lv = log_factorial(m) - log_factorial(n) -
                      log_factorial(m - n) + n * log_e + (m - n) * log_1me;
    d(m) = std::exp(lv);
  }
  return d;
}

double povm_completeness_defect(Efficiency eps,
                                const TruncationBudget& budget) {
  RVec acc = RVec::Zero(budget.dim());
  for (int n = 0; n <= budget.cutoff; ++n)
    acc += povm_element_diagonal(eps, n, budget);
  return (acc.array() - 1.0).abs().maxCoeff();
}

cxd coherent_count_kernel(Efficiency eps, int n, cxd gamma, cxd delta) {
  eps.validate();
  if (n < 0) throw DomainError("count must be >= 0");
  const cxd gd = std::conj(gamma) * delta;
  const double e = eps.value;
  const cxd pref = std::exp(-0.5 * std::norm(gamma) - 0.5 * std::norm(delta) +
                            (1.0 - e) * gd);
  if (n == 0) return pref;
  // (e * gd)^n / n! computed in log-polar form to dodge overflow.
  const double mag = std::abs(gd);
  if (mag == 0.0) return cxd(0.0, 0.0);
  const double lmag = n * (std::log(e) + std::log(mag)) - log_factorial(n);
  return pref * std::polar(std::exp(lmag), n * std::arg(gd));
}

CountDistribution count_distribution(const CoherentSuperposition& state,
                                     Efficiency eps, int max_n) {
  if (max_n < 0) throw DomainError("max_n must be >= 0");
  CountDistribution out;
  out.probs.assign(static_cast<size_t>(max_n) + 1, 0.0);
  for (int n = 0; n <= max_n; ++n) {
    cxd acc(0.0, 0.0);
    for (const auto& ti : state.terms)
      for (const auto& tj : state.terms)
        acc += std::conj(ti.coeff) * tj.coeff *
               coherent_count_kernel(eps, n, ti.amplitude, tj.amplitude);
    out.probs[n] = std::max(0.0, acc.real());
  }
  out.tail_mass = std::max(0.0, 1.0 - std::accumulate(out.probs.begin(),
                                                      out.probs.end(), 0.0));
  return out;
}

CountDistribution count_distribution(const FockDensityMatrix& state,
                                     Efficiency eps, int max_n) {
  if (max_n < 0) throw DomainError("max_n must be >= 0");
  CountDistribution out;
  out.probs.assign(static_cast<size_t>(max_n) + 1, 0.0);
  for (int n = 0; n <= max_n; ++n) {
    const RVec diag = povm_element_diagonal(eps, n, state.budget);
    double acc = 0.0;
    for (int m = 0; m < state.dim(); ++m)
      acc += diag(m) * state.m(m, m).real();
    out.probs[n] = std::max(0.0, acc);
  }
  out.tail_mass = std::max(0.0, 1.0 - std::accumulate(out.probs.begin(),
                                                      out.probs.end(), 0.0));
  return out;
}

int required_max_count(const CoherentSuperposition& state, Efficiency eps,
                       double tail_tol) {
  // Thinned coherent terms give Poisson statistics; double max_n until the
  // analytic tail drops below tolerance.
  double max_mean = 0.0;
  for (const auto& t : state.terms)
    max_mean = std::max(max_mean, eps.value * std::norm(t.amplitude));
  int max_n = std::max(8, static_cast<int>(std::ceil(2.0 * max_mean)));
  for (; max_n <= 100000; max_n *= 2) {
    const CountDistribution d = count_distribution(state, eps, max_n);
    if (d.tail_mass < tail_tol) return max_n;
  }
  throw TruncationInsufficient("count tail does not close below 1e5 counts");
}

std::vector<std::vector<int>> sample_counts(
    const std::vector<DetectorChannel>& channels, int shots,
    std::uint64_t seed) {
  if (shots < 1) throw DomainError("shots must be >= 1");
  std::vector<std::vector<int>> out(shots,
                                    std::vector<int>(channels.size(), 0));
  // Independent per-channel streams from split seeds keep detectors
  // uncorrelated regardless of channel count.
  std::uint64_t state = seed;
  for (size_t c = 0; c < channels.size(); ++c) {
    channels[c].eps.validate();
    const double mean = channels[c].eps.value * channels[c].mean_photons;
    std::mt19937_64 rng(splitmix64_next(state));
    if (mean <= 0.0) continue;
    std::poisson_distribution<int> pois(mean);
    for (int s = 0; s < shots; ++s) out[s][c] = pois(rng);
  }
  return out;
}

std::vector<int> sample_from_distribution(const CountDistribution& dist,
                                          int shots, std::uint64_t seed) {
  if (shots < 1) throw DomainError("shots must be >= 1");
  std::vector<double> cdf(dist.probs.size(), 0.0);
  double acc = 0.0;
  for (size_t i = 0; i < dist.probs.size(); ++i) {
    acc += dist.probs[i];
    cdf[i] = acc;
  }
  std::uint64_t state = seed;
  std::mt19937_64 rng(splitmix64_next(state));
  std::uniform_real_distribution<double> uni(0.0, acc + dist.tail_mass);
  std::vector<int> out(shots, 0);
  for (int s = 0; s < shots; ++s) {
    const double u = uni(rng);
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    out[s] = static_cast<int>(it == cdf.end() ? cdf.size() - 1
                                              : it - cdf.begin());
  }
  return out;
}

double tv_distance(const std::vector<int>& samples,
                   const CountDistribution& dist) {
  std::vector<double> emp(dist.probs.size(), 0.0);
  double overflow = 0.0;
  const double w = 1.0 / static_cast<double>(samples.size());
  for (int s : samples) {
    if (s >= 0 && s < static_cast<int>(emp.size()))
      emp[s] += w;
    else
      overflow += w;
  }
  double tv = overflow + dist.tail_mass;  // mass outside the common support
  for (size_t i = 0; i < emp.size(); ++i)
    tv += std::abs(emp[i] - dist.probs[i]);
  return 0.5 * tv;
}

}  // namespace hdsim
