#pragma once

#include <cstdint>
#include <vector>

#include "hdsim/types.hpp"

namespace hdsim {

// ---------------------------------------------------------------------------
// Efficiency POVM: binomially smeared photon counting
// ---------------------------------------------------------------------------

// Diagonal of the POVM element for count n at efficiency eps:
// entry_m = C(m,n) eps^n (1-eps)^{m-n} for m >= n, else 0.
// eps = 1 is the exact projector branch (Kronecker delta).
RVec povm_element_diagonal(Efficiency eps, int n,
                           const TruncationBudget& budget);

// max over levels m <= cutoff of |1 - sum_{n<=cutoff} entry_m(E_n)|.
double povm_completeness_defect(Efficiency eps, const TruncationBudget& budget);

// Exact coherent-state kernel <gamma| E_n |delta> =
//   (eps conj(gamma) delta)^n / n! * e^{-(|gamma|^2+|delta|^2)/2}
//   * e^{(1-eps) conj(gamma) delta}.
cxd coherent_count_kernel(Efficiency eps, int n, cxd gamma, cxd delta);

// Photo-count distribution of a state under efficiency eps.
// Superposition path: bilinear kernel sums (exact). Density path: diagonal
// contraction against the truncated POVM elements.
CountDistribution count_distribution(const CoherentSuperposition& state,
                                     Efficiency eps, int max_n);
CountDistribution count_distribution(const FockDensityMatrix& state,
                                     Efficiency eps, int max_n);

// Smallest max_n with analytic tail below tail_tol for a coherent input
// (thinned-Poisson tail doubling search).
int required_max_count(const CoherentSuperposition& state, Efficiency eps,
                       double tail_tol);

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

// One detector illuminated by a single coherent amplitude: counts are
// Poisson(eps |amplitude|^2). Valid for single coherent terms only.
struct DetectorChannel {
  double mean_photons;  // |amplitude|^2 before thinning
  Efficiency eps;
};

// shots x channels count matrix; per-channel independent streams derived
// from the seed. Reproducible.
std::vector<std::vector<int>> sample_counts(
    const std::vector<DetectorChannel>& channels, int shots,
    std::uint64_t seed);

// Inverse-CDF sampler over an explicit analytic distribution (used for
// superposition states, where the interference terms preclude independent
// per-mode thinning).
std::vector<int> sample_from_distribution(const CountDistribution& dist,
                                          int shots, std::uint64_t seed);

// Total-variation distance between an empirical histogram and an analytic
// count distribution.
double tv_distance(const std::vector<int>& samples,
                   const CountDistribution& dist);

}  // namespace hdsim
