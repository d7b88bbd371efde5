#pragma once

#include <cstdint>

#include "hdsim/types.hpp"

namespace hdsim {

// ---------------------------------------------------------------------------
// Balanced homodyne detection: exact finite-LO statistics, characteristic
// functions, the Gaussian smear kernel, and the high-amplitude limit.
// ---------------------------------------------------------------------------

// 50:50 beam splitter on coherent labels: (a,b) -> ((a-b)/sqrt2, (a+b)/sqrt2).
std::pair<cxd, cxd> beam_splitter_map(cxd a, cxd b);

// Scaled count-difference outcome x(m,n) = (n/eps2 - m/eps1) / (sqrt(2) r).
double outcome_value(int m, int n, double r, Efficiency eps1, Efficiency eps2);

// Exact distribution of the scaled difference statistic for a coherent
// superposition signal against LO |z>, detector efficiencies eps1/eps2.
// Outcomes with coinciding x(m,n) are merged (tolerance 1e-12).
ScaledDifferenceDistribution finite_z_distribution(
    const CoherentSuperposition& signal, const LocalOscillator& lo,
    Efficiency eps1, Efficiency eps2, const TruncationBudget& budget);

// Exact finite-LO characteristic function matrix element
//   integral e^{itx} d<alpha| E^z(x) |beta>
// in closed form (stable complex-exponential grouping; relative error
// < 1e-10 up to r ~ 1e6).
cxd finite_z_char_fn(cxd alpha, cxd beta, const LocalOscillator& lo,
                     Efficiency eps1, Efficiency eps2, double t);

// Bilinear extension to a superposition signal.
cxd finite_z_char_fn(const CoherentSuperposition& signal,
                     const LocalOscillator& lo, Efficiency eps1,
                     Efficiency eps2, double t);

// High-amplitude-limit characteristic function matrix element:
//   <alpha|beta> * exp(it (conj(alpha) e^{i theta} + beta e^{-i theta})/sqrt2)
//               * exp(-t^2 (1/eps1 + 1/eps2) / 8).
cxd limit_char_fn(cxd alpha, cxd beta, double theta, Efficiency eps1,
                  Efficiency eps2, double t);
cxd limit_char_fn(const CoherentSuperposition& signal, double theta,
                  Efficiency eps1, Efficiency eps2, double t);

// Quadratic probe a x^2 (1 - e^{-i/(a x)}) + b x^2 (1 - e^{+i/(b x)}) and its
// x -> infinity limit (1/a + 1/b)/2; |probe - limit| = O(1/x).
cxd quadratic_limit_probe(double a, double b, double x);
double quadratic_limit_value(double a, double b);

// Gaussian kernel density
//   f(x) = sqrt(2 e1 e2 / (pi (e1 - 2 e1 e2 + e2))) *
//          exp(-2 e1 e2 x^2 / (e1 - 2 e1 e2 + e2)).
// Throws KindError for the Dirac kernel.
double gaussian_kernel_density(const SmearKernel1D& k, double x);

// Probability that the kernel-smeared rotated quadrature of the signal lands
// in [x_lo, x_hi]. Gaussian-convolution closed form with complex-erf interval
// evaluation; Dirac kernel gives the plain quadrature probability.
double smeared_quadrature_prob(const CoherentSuperposition& signal,
                               double theta, const SmearKernel1D& k,
                               double x_lo, double x_hi);

// Density of the same smeared quadrature at a point.
double smeared_quadrature_density(const CoherentSuperposition& signal,
                                  double theta, const SmearKernel1D& k,
                                  double x);

// For each LO amplitude in the schedule: sup over the t-grid of
// |finite_z_char_fn - limit_char_fn|, evaluated bilinearly on the signal.
std::vector<ConvergenceRow> convergence_report(
    const CoherentSuperposition& signal, double theta, Efficiency eps1,
    Efficiency eps2, const ConvergenceSchedule& schedule);

// Draw iid samples of the scaled difference statistic by inverse CDF over
// the exact finite-LO distribution.
std::vector<double> sample_finite_z(const ScaledDifferenceDistribution& dist,
                                    int shots, std::uint64_t seed);

}  // namespace hdsim
