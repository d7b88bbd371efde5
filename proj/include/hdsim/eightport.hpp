#pragma once

#include <cstdint>

#include "hdsim/types.hpp"

namespace hdsim {

// ---------------------------------------------------------------------------
// Eight-port (double homodyne) detection: exact joint statistics, the 2-D
// smear kernel, the limiting covariant observable, and generating-operator
// calculus.
// ---------------------------------------------------------------------------

// One bilinear term of the reduced two-arm statistics: weight times a pair of
// single-arm problems with coherent labels (bra, ket) per arm.
struct ReducedTerm {
  cxd weight;          // conj(c_i) c_j conj(d_k) d_l
  cxd arm1_bra, arm1_ket;  // signal labels feeding the x arm (LO z)
  cxd arm2_bra, arm2_ket;  // signal labels feeding the y arm (LO z e^{i phi})
};

// Expand the input states over coherent terms and push them through the
// splitter network: arm1 sees (alpha - beta)/sqrt2, arm2 (alpha + beta)/sqrt2
// for signal label alpha and second-input label beta.
std::vector<ReducedTerm> reduce_to_double_homodyne(
    const CoherentSuperposition& rho, const CoherentSuperposition& S,
    const EightPortConfig& cfg);

// Exact joint distribution of the two scaled difference statistics
// (X, Y) = sqrt(2) * (per-arm scaled differences); atoms on the product
// lattice, merged per axis.
JointOutcomeDistribution joint_finite_distribution(
    const CoherentSuperposition& rho, const CoherentSuperposition& S,
    const EightPortConfig& cfg, const TruncationBudget& budget);

// Sparse count 4-tuple distribution (k,l,m,n) for small LO amplitude.
JointCountDistribution joint_count_distribution(
    const CoherentSuperposition& rho, const CoherentSuperposition& S,
    const EightPortConfig& cfg, const TruncationBudget& budget);

// 2-D kernel density f(x,y) = (1/2) f1(x/sqrt2) f2(y/sqrt2).
// Throws KindError when either axis is Dirac.
double kernel2d_density(const SmearKernel2D& k, double x, double y);

// Number-basis entrywise conjugation (the position-representation
// conjugation map); involutive, positivity- and trace-preserving.
FockDensityMatrix conjugate_generating_operator(const FockDensityMatrix& S);

// (1/2pi) tr[rho W_{q,p} T W_{q,p}^*] -- the covariant-observable density
// with generating operator T at phase-space point (q,p).
double covariant_density(const FockDensityMatrix& rho,
                         const FockDensityMatrix& T, double q, double p);

// Evaluation over a whole grid. T is eigendecomposed once; per-point cost is
// a few matrix-vector products against exact displacement columns.
PhaseSpaceGrid covariant_density_grid(const FockDensityMatrix& rho,
                                      const FockDensityMatrix& T,
                                      PhaseSpaceGrid grid);

// High-amplitude-limit outcome density: kernel * (covariant density of the
// conjugated second input), evaluated by smearing the ideal density on the
// grid. Dirac kernel returns the ideal density itself.
PhaseSpaceGrid limit_density(const FockDensityMatrix& rho,
                             const FockDensityMatrix& S,
                             const SmearKernel2D& k, PhaseSpaceGrid grid);

// Kernel-weighted average of displaced copies of T, via tensorized
// Gauss-Hermite quadrature (41 nodes per Gaussian axis by default):
//   integral W_{q,p} T W_{q,p}^* f(q,p) dq dp.
// Dirac kernel returns T unchanged.
FockDensityMatrix generating_operator_convolution(const FockDensityMatrix& T,
                                                  const SmearKernel2D& k,
                                                  const TruncationBudget& budget,
                                                  int nodes_per_axis = 41);

// Largest eigenvalue and pure/not-pure verdict (purity_tol = 1e-9).
PurityReport purity_extremality_check(const FockDensityMatrix& T);

// Closed-form smeared vacuum at common efficiency eps:
//   eps * sum_n (1-eps)^n |n><n|
// split as eps |0><0| + (1-eps) S', S' = (eps/(1-eps)) sum_{n>=1}(1-eps)^n |n><n|.
struct VacuumDecomposition {
  double vacuum_weight;       // eps
  FockDensityMatrix residual; // S'
  FockDensityMatrix total;    // eps|0><0| + (1-eps) S'
};
VacuumDecomposition vacuum_component_decomposition(Efficiency eps,
                                                   const TruncationBudget& budget);

// Sup over interior grid points of |density(displaced rho) - translated
// density(rho)| for a phase-space shift (q0, p0).
double covariance_check(const FockDensityMatrix& rho,
                        const FockDensityMatrix& T, double q0, double p0,
                        const PhaseSpaceGrid& grid);

// Exact iid samplers of the smeared limit-observable statistics (vacuum
// second input): ideal-density draw plus independent per-axis kernel noise.
// Coherent signal: the ideal density is the unit Gaussian at
// (sqrt2 Re a, sqrt2 Im a). Photon-number signal |n>: the radial law is the
// Gamma(n+1) distribution in r^2/2 with uniform angle.
std::vector<std::pair<double, double>> sample_smeared_coherent(
    cxd alpha, const SmearKernel2D& k, int shots, std::uint64_t seed);
std::vector<std::pair<double, double>> sample_smeared_fock(
    int n, const SmearKernel2D& k, int shots, std::uint64_t seed);

}  // namespace hdsim
