#pragma once

#include <array>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hdsim {

using cxd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Bad arguments / out-of-domain parameters.
struct DomainError : Error {
  using Error::Error;
};
// A requested Fock cutoff cannot hold the state or operation to tolerance.
struct TruncationInsufficient : Error {
  using Error::Error;
};
// A grid is too coarse or too small for the requested operation.
struct ResolutionError : Error {
  using Error::Error;
};
// Density-matrix validation failed (hermiticity / positivity / trace).
struct ValidationError : Error {
  using Error::Error;
};
// Density requested for a Dirac (degenerate) kernel factor.
struct KindError : Error {
  using Error::Error;
};
// State reconstruction divisor has no usable frequency support.
struct DivisorThresholdError : Error {
  using Error::Error;
};
// Input state type not supported by the requested computation path.
struct UnsupportedState : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Truncation budget
// ---------------------------------------------------------------------------

// Finite Fock-space window: photon numbers 0..cutoff are retained and
// tail_tol bounds the probability mass allowed to leak past the cutoff.
struct TruncationBudget {
  int cutoff = 64;
  double tail_tol = 1e-10;

  int dim() const { return cutoff + 1; }
  void validate() const {
    if (cutoff < 0) throw DomainError("cutoff must be >= 0");
    if (!(tail_tol > 0.0 && tail_tol < 1.0))
      throw DomainError("tail_tol must lie in (0,1)");
  }
};

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

// Dense state vector in the number basis, indices 0..dim-1.
struct FockVector {
  CVec c;
  double leaked_mass = 0.0;  // probability mass beyond the cutoff

  int dim() const { return static_cast<int>(c.size()); }
};

// Density matrix on the truncated number basis.
struct FockDensityMatrix {
  CMat m;
  TruncationBudget budget;

  int dim() const { return static_cast<int>(m.rows()); }
  double trace_real() const { return m.trace().real(); }
};

// Finite linear combination sum_i coeff_i |amplitude_i> of coherent states.
// The dense span of such vectors is the exact-computation domain for the
// homodyne statistics: every formula reduces to closed forms on them.
struct CoherentTerm {
  cxd coeff;
  cxd amplitude;
};

struct CoherentSuperposition {
  std::vector<CoherentTerm> terms;

  static CoherentSuperposition single(cxd amplitude) {
    return CoherentSuperposition{{CoherentTerm{1.0, amplitude}}};
  }
  // <psi|psi> from pairwise coherent overlaps (exact, no truncation).
  double norm_squared() const;
  // Rescale coefficients so norm_squared() == 1.
  void normalize();
};

// ---------------------------------------------------------------------------
// Detector efficiency
// ---------------------------------------------------------------------------

struct Efficiency {
  double value = 1.0;

  void validate() const {
    if (!(value > 0.0 && value <= 1.0))
      throw DomainError("efficiency must lie in (0,1]");
  }
  bool ideal() const { return value == 1.0; }
};

// Photo-count distribution over n = 0,1,2,...; tail_mass is the probability
// not covered by the listed counts.
struct CountDistribution {
  std::vector<double> probs;  // index = count
  double tail_mass = 0.0;

  double total() const;
};

// ---------------------------------------------------------------------------
// Homodyne outcome data
// ---------------------------------------------------------------------------

// Local oscillator |z> with z = r e^{i theta}.
struct LocalOscillator {
  double r = 1.0;
  double theta = 0.0;

  cxd z() const { return std::polar(r, theta); }
  void validate() const {
    if (!(r > 0.0)) throw DomainError("local oscillator amplitude must be > 0");
  }
};

// Discrete distribution of the scaled count-difference statistic.
struct ScaledDifferenceAtom {
  double outcome;
  double probability;
};

struct ScaledDifferenceDistribution {
  std::vector<ScaledDifferenceAtom> atoms;  // sorted by outcome
  double tail_mass = 0.0;

  double total() const;
  double mean() const;
  double variance() const;
};

// 1-D smear kernel: Dirac when both detectors are ideal, otherwise the
// centered Gaussian whose variance is set by the two efficiencies.
struct SmearKernel1D {
  enum class Kind { Dirac, Gaussian };
  Kind kind = Kind::Dirac;
  Efficiency eps1, eps2;

  static SmearKernel1D from_efficiencies(Efficiency e1, Efficiency e2);
  double variance() const;  // 0 for Dirac
};

// Increasing LO amplitudes plus the t-grid where characteristic functions
// are compared.
struct ConvergenceSchedule {
  std::vector<double> amplitudes;
  std::vector<double> t_grid;

  void validate() const;
};

struct ConvergenceRow {
  double r;
  double sup_error;
};

// ---------------------------------------------------------------------------
// Eight-port data
// ---------------------------------------------------------------------------

// Detector efficiencies (eps1..eps4), the phase shift between the two
// measurement arms, and the LO parameter z (the physical oscillator state
// carries amplitude sqrt(2) z).
struct EightPortConfig {
  Efficiency eps1, eps2, eps3, eps4;
  double phase_shift = 1.5707963267948966;  // pi/2
  LocalOscillator lo;

  void validate() const {
    eps1.validate();
    eps2.validate();
    eps3.validate();
    eps4.validate();
    lo.validate();
  }
};

// Separable 2-D smear kernel: per-axis 1-D kernels with the fixed 1/sqrt(2)
// argument scaling of the eight-port outcome calibration.
struct SmearKernel2D {
  SmearKernel1D kx;  // x axis, from (eps1, eps3)
  SmearKernel1D ky;  // y axis, from (eps2, eps4)

  static SmearKernel2D from_efficiencies(Efficiency e1, Efficiency e2,
                                         Efficiency e3, Efficiency e4);
  static SmearKernel2D dirac();
  // Per-axis variances of the 2-D kernel including the 1/sqrt(2) argument
  // scaling: var = 2 * (1-D kernel variance); 0 on Dirac axes.
  double variance_x() const;
  double variance_y() const;
  bool fully_dirac() const;
};

// Uniform rectangular phase-space grid; value(i,j) lives at
// (q_min + i*dq, p_min + j*dp).
struct PhaseSpaceGrid {
  double q_min = -8.0, q_max = 8.0;
  double p_min = -8.0, p_max = 8.0;
  int nq = 256, np = 256;
  RMat values;  // nq x np

  double dq() const { return (q_max - q_min) / nq; }
  double dp() const { return (p_max - p_min) / np; }
  double q(int i) const { return q_min + i * dq(); }
  double p(int j) const { return p_min + j * dp(); }
  double mass() const { return values.sum() * dq() * dp(); }
  void allocate() { values = RMat::Zero(nq, np); }
  static PhaseSpaceGrid make(double qmin, double qmax, double pmin,
                             double pmax, int n_q, int n_p);
};

// Sparse joint photo-count distribution over detector 4-tuples (k,l,m,n).
struct JointCountDistribution {
  std::map<std::array<int, 4>, double> atoms;
  double tail_mass = 0.0;

  double total() const;
};

// Atom of the bivariate scaled-difference distribution.
struct JointOutcomeAtom {
  double x;
  double y;
  double probability;
};

struct JointOutcomeDistribution {
  std::vector<JointOutcomeAtom> atoms;
  double tail_mass = 0.0;

  double total() const;
};

// ---------------------------------------------------------------------------
// Deconvolution policy
// ---------------------------------------------------------------------------

enum class DeconvMode { ExactDivision, Thresholded, Tikhonov };

struct DeconvolutionPolicy {
  DeconvMode mode = DeconvMode::Thresholded;
  // Threshold on the smear multiplier, relative to its maximum.
  double threshold = 1e-6;
  // Tikhonov regularization weight; 0 requests the discrepancy-principle
  // auto choice (needs noise_level).
  double lambda = 0.0;
  // Estimated noise level of the input grid (L2), used by the auto-lambda.
  double noise_level = 0.0;

  void validate() const {
    if (mode == DeconvMode::Thresholded && !(threshold > 0.0))
      throw DomainError("thresholded mode requires threshold > 0");
    if (lambda < 0.0) throw DomainError("lambda must be >= 0");
  }
};

// Diagnostics attached to a deconvolution result.
struct DeconvolutionReport {
  double multiplier_max = 0.0;
  double multiplier_min_used = 0.0;
  int cells_total = 0;
  int cells_inverted = 0;
  double condition_number = 0.0;  // max/min multiplier over inverted cells
  bool noise_amplification_warning = false;
  double lambda_used = 0.0;
};

// Report of a density-matrix validation run.
struct ValidationReport {
  double hermiticity_defect = 0.0;
  double min_eigenvalue = 0.0;
  double trace_defect = 0.0;
  bool pass = false;
};

// Purity/extremality check result.
struct PurityReport {
  bool is_pure = false;
  double largest_eigenvalue = 0.0;
};

// Result of a density-matrix reconstruction from phase-space data.
struct ReconstructionReport {
  FockDensityMatrix rho;
  double projection_residual = 0.0;  // L2 change made by the PSD projection
  double trace_before_projection = 0.0;
  int cells_used = 0;
  double divisor_min_used = 0.0;
  double fidelity = -1.0;  // filled by callers holding a ground truth
};

}  // namespace hdsim
