#pragma once

#include "hdsim/types.hpp"

namespace hdsim {

// ---------------------------------------------------------------------------
// Forward Gaussian smearing, regularized Fourier deconvolution, and direct
// grid-based density-matrix reconstruction.
//
// Transform convention (fixed everywhere): symmetric 1/(2pi) normalization,
// forward kernel e^{-i(x q_x + y q_y)}; for that convention the 2-D
// convolution theorem reads (f * g)^ = 2pi fhat ghat.
// ---------------------------------------------------------------------------

// Complex frequency-domain payload conjugate to a PhaseSpaceGrid (standard
// DFT frequency layout, row-major like the source grid).
struct FrequencyGrid {
  int nq = 0, np = 0;
  double dq = 0.0,
         dp = 0.0;  // spatial steps of the source grid (for scaling)
  std::vector<double> freq_q;  // angular frequencies along axis 0
  std::vector<double> freq_p;  // angular frequencies along axis 1
  std::vector<cxd> values;     // nq * np, row-major

  cxd& at(int i, int j) { return values[static_cast<size_t>(i) * np + j]; }
  const cxd& at(int i, int j) const {
    return values[static_cast<size_t>(i) * np + j];
  }
};

// Continuous-convention Fourier transform of the grid payload (includes the
// x-offset phases and the (1/2pi) dx dy scaling).
FrequencyGrid grid_fourier(const PhaseSpaceGrid& g);

// Inverse of grid_fourier back onto the same spatial layout.
PhaseSpaceGrid grid_fourier_inverse(const FrequencyGrid& f,
                                    const PhaseSpaceGrid& layout);

// Analytic Fourier transform of the 2-D smear kernel at an angular frequency
// point; real, positive, equal to 1/(2pi) at the origin, never zero.
double kernel_fourier(const SmearKernel2D& k, double freq_q, double freq_p);

// h = kernel * g via FFT with the analytic kernel transform as multiplier
// (zero-padded 2x per axis: true linear convolution; mass preserved).
// Requires >= 6 samples per kernel standard deviation on Gaussian axes.
PhaseSpaceGrid forward_smear(const PhaseSpaceGrid& g, const SmearKernel2D& k);

// Invert the smearing in Fourier space under the given policy.
//   ExactDivision: divide wherever the multiplier exceeds an internal
//     underflow guard (1e-4 relative); intended for noiseless synthetic data.
//   Thresholded: divide where multiplier >= threshold * max, zero elsewhere.
//   Tikhonov: multiplier m / (m^2 + lambda^2); lambda auto-set by the
//     discrepancy principle when policy.lambda == 0 and a noise level is
//     supplied.
// Uses the unpadded cyclic FFT so that deconvolve(forward_smear(g)) is exact
// on resolved frequencies.
PhaseSpaceGrid deconvolve(const PhaseSpaceGrid& h, const SmearKernel2D& k,
                          const DeconvolutionPolicy& policy,
                          DeconvolutionReport* report = nullptr);

// tr[rho W_{p,-q}]: the Weyl-transform value of the state at frequency
// point (q,p) of the phase-space density. Exact per entry.
cxd weyl_transform_of_state(const FockDensityMatrix& rho, double q, double p);

// Reconstruct a density matrix from a phase-space density g known to be the
// covariant-observable density with generating operator T:
//   tr[rho W] = 2pi ghat / tr[W^* T] on the frequency grid, inverted by a
//   Riemann-sum quadrature against displacement matrices, then projected to
//   the PSD unit-trace cone by eigenvalue clipping + trace renormalization.
// Frequency cells with |tr[W^* T]| < divisor_threshold are excluded; if no
// cell survives, DivisorThresholdError is thrown.
ReconstructionReport reconstruct_state(const PhaseSpaceGrid& g,
                                       const FockDensityMatrix& T,
                                       const TruncationBudget& budget,
                                       double divisor_threshold = 1e-8);

// L1 distance between two grids (integral of |a-b|).
double grid_l1_distance(const PhaseSpaceGrid& a, const PhaseSpaceGrid& b);

// Relative L2 distance ||a-b|| / ||b||.
double grid_rel_l2(const PhaseSpaceGrid& a, const PhaseSpaceGrid& b);

// Bin iid (x,y) samples onto a grid as a normalized density histogram.
PhaseSpaceGrid histogram_density(const std::vector<std::pair<double, double>>& xs,
                                 PhaseSpaceGrid layout);

}  // namespace hdsim
