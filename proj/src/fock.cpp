#include "hdsim/fock.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hdsim/math.hpp"

namespace hdsim {

// ---------------------------------------------------------------------------
// Shared small-type methods
// ---------------------------------------------------------------------------

double CoherentSuperposition::norm_squared() const {
  cxd acc(0.0, 0.0);
  for (const auto& ti : terms)
    for (const auto& tj : terms)
      acc += std::conj(ti.coeff) * tj.coeff *
             coherent_overlap(ti.amplitude, tj.amplitude);
  return acc.real();
}

void CoherentSuperposition::normalize() {
  const double n2 = norm_squared();
  if (!(n2 > 0.0)) throw DomainError("cannot normalize a null superposition");
  const double s = 1.0 / std::sqrt(n2);
  for (auto& t : terms) t.coeff *= s;
}

double CountDistribution::total() const {
  double acc = 0.0;
  for (double p : probs) acc += p;
  return acc + tail_mass;
}

double ScaledDifferenceDistribution::total() const {
  double acc = 0.0;
  for (const auto& a : atoms) acc += a.probability;
  return acc + tail_mass;
}

double ScaledDifferenceDistribution::mean() const {
  double acc = 0.0;
  for (const auto& a : atoms) acc += a.outcome * a.probability;
  return acc;
}

double ScaledDifferenceDistribution::variance() const {
  const double mu = mean();
  double acc = 0.0;
  for (const auto& a : atoms)
    acc += (a.outcome - mu) * (a.outcome - mu) * a.probability;
  return acc;
}

double JointCountDistribution::total() const {
  double acc = 0.0;
  for (const auto& [k, v] : atoms) acc += v;
  return acc + tail_mass;
}

double JointOutcomeDistribution::total() const {
  double acc = 0.0;
  for (const auto& a : atoms) acc += a.probability;
  return acc + tail_mass;
}

PhaseSpaceGrid PhaseSpaceGrid::make(double qmin, double qmax, double pmin,
                                    double pmax, int n_q, int n_p) {
  if (!(qmax > qmin && pmax > pmin) || n_q < 2 || n_p < 2)
    throw DomainError("invalid phase-space grid extents");
  PhaseSpaceGrid g;
  g.q_min = qmin;
  g.q_max = qmax;
  g.p_min = pmin;
  g.p_max = pmax;
  g.nq = n_q;
  g.np = n_p;
  g.allocate();
  return g;
}

// ---------------------------------------------------------------------------
// Coherent states
// ---------------------------------------------------------------------------

FockVector coherent_fock_coefficients_unchecked(cxd z, int dim) {
  FockVector out;
  out.c = CVec::Zero(dim);
  const double az = std::abs(z);
  if (az == 0.0) {
    if (dim > 0) out.c(0) = 1.0;
    out.leaked_mass = 0.0;
    return out;
  }
  const double la = std::log(az);
  const double ph = std::arg(z);
  double captured = 0.0;
  for (int n = 0; n < dim; ++n) {
    const double mag =
        std::exp(-0.5 * az * az + n * la - 0.5 * log_factorial(n));
    out.c(n) = std::polar(mag, n * ph);
    captured += mag * mag;
  }
  out.leaked_mass = std::max(0.0, 1.0 - captured);
  return out;
}

FockVector coherent_fock_coefficients(cxd z, const TruncationBudget& budget) {
  budget.validate();
  FockVector out = coherent_fock_coefficients_unchecked(z, budget.dim());
  if (out.leaked_mass > budget.tail_tol)
    throw TruncationInsufficient(
        "coherent state leaks " + std::to_string(out.leaked_mass) +
        " mass past cutoff " + std::to_string(budget.cutoff));
  return out;
}

cxd coherent_overlap(cxd a, cxd b) {
  return std::exp(-0.5 * std::norm(a) - 0.5 * std::norm(b) +
                  std::conj(a) * b);
}

double coherent_position_density(cxd z, double x) {
  const double q = std::sqrt(2.0) * z.real();
  const double d = x - q;
  return std::exp(-d * d) / std::sqrt(M_PI);
}

cxd coherent_position_cross(cxd z, cxd w, double x) {
  const auto wavefn = [](cxd zz, double xx) -> cxd {
    const double q = std::sqrt(2.0) * zz.real();
    const double p = std::sqrt(2.0) * zz.imag();
    const double d = xx - q;
    const cxd phase = std::exp(cxd(0.0, -0.5 * q * p + p * xx));
    return std::pow(M_PI, -0.25) * phase * std::exp(-0.5 * d * d);
  };
  return wavefn(z, x) * std::conj(wavefn(w, x));
}

// ---------------------------------------------------------------------------
// Displacements
// ---------------------------------------------------------------------------

cxd displacement_entry(int m, int n, cxd alpha) {
  if (m < 0 || n < 0) throw DomainError("negative Fock index");
  const double a2 = std::norm(alpha);
  if (a2 == 0.0) return m == n ? cxd(1.0, 0.0) : cxd(0.0, 0.0);
  const int k = std::abs(m - n);
  const int d = std::min(m, n);
  // Associated Laguerre L_d^{(k)}(a2) by upward recurrence.
  double Lp = 1.0;            // L_0
  double L = 1.0 + k - a2;    // L_1
  if (d == 0) {
    L = Lp;
  } else {
    for (int j = 1; j < d; ++j) {
      const double Ln = ((2.0 * j + 1.0 + k - a2) * L - (j + k) * Lp) / (j + 1.0);
      Lp = L;
      L = Ln;
    }
  }
  const double lmag = 0.5 * (log_factorial(d) - log_factorial(d + k)) +
                      0.5 * k * std::log(a2) - 0.5 * a2;
  const double mag = std::exp(lmag);
  const double ph = std::arg(alpha);
  if (m >= n) {
    // sqrt(n!/m!) alpha^{m-n} e^{-|a|^2/2} L_n^{(m-n)}(|a|^2)
    return std::polar(mag, k * ph) * L;
  }
  // sqrt(m!/n!) (-conj(alpha))^{n-m} e^{-|a|^2/2} L_m^{(n-m)}(|a|^2)
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * std::polar(mag, -k * ph) * L;
}

CMat displacement_matrix_alpha(cxd alpha, int dim) {
  CMat D(dim, dim);
  // Column 0 is the coherent vector. Successive columns follow from the
  // operator identity D a^dag = (a^dag - conj(alpha)) D, whose matrix form
  // only references rows m-1 and m of the previous column, so the recurrence
  // reproduces the exact entries on the truncated space in O(dim^2).
  std::vector<double> root(static_cast<size_t>(dim));
  for (int m = 0; m < dim; ++m) root[static_cast<size_t>(m)] = std::sqrt(m);
  D(0, 0) = std::exp(cxd(-0.5 * std::norm(alpha), 0.0));
  for (int m = 1; m < dim; ++m)
    D(m, 0) = D(m - 1, 0) * alpha / root[static_cast<size_t>(m)];
  const cxd ac = std::conj(alpha);
  for (int n = 0; n + 1 < dim; ++n) {
    const double rn = std::sqrt(n + 1.0);
    D(0, n + 1) = -ac * D(0, n) / rn;
    for (int m = 1; m < dim; ++m)
      D(m, n + 1) =
          (root[static_cast<size_t>(m)] * D(m - 1, n) - ac * D(m, n)) / rn;
  }
  return D;
}

CMat displacement_matrix(double q, double p, const TruncationBudget& budget) {
  budget.validate();
  const cxd alpha = cxd(q, p) / std::sqrt(2.0);
  return displacement_matrix_alpha(alpha, budget.dim());
}

cxd weyl_entry(int m, int n, double q, double p) {
  return displacement_entry(m, n, cxd(q, p) / std::sqrt(2.0));
}

double displacement_leakage(double q, double p, int dim) {
  const cxd alpha = cxd(q, p) / std::sqrt(2.0);
  double captured = 0.0;
  for (int m = 0; m < dim; ++m) captured += std::norm(displacement_entry(m, 0, alpha));
  return std::max(0.0, 1.0 - captured);
}

// ---------------------------------------------------------------------------
// Rotations, validation, functionals
// ---------------------------------------------------------------------------

FockDensityMatrix rotate_state(const FockDensityMatrix& rho, double theta) {
  FockDensityMatrix out = rho;
  const int d = rho.dim();
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n)
      out.m(m, n) = rho.m(m, n) * std::exp(cxd(0.0, theta * (m - n)));
  return out;
}

ValidationReport validate_density(const FockDensityMatrix& rho) {
  ValidationReport rep;
  const CMat& r = rho.m;
  rep.hermiticity_defect = (r - r.adjoint()).cwiseAbs().maxCoeff();
  const CMat h = 0.5 * (r + r.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.trace_defect = std::abs(r.trace().real() - 1.0);
  const double trace_tol = std::max(1e-10, rho.budget.tail_tol);
  rep.pass = rep.hermiticity_defect <= 1e-10 &&
             rep.min_eigenvalue >= -1e-10 && rep.trace_defect <= trace_tol;
  return rep;
}

void require_valid_density(const FockDensityMatrix& rho,
                           const std::string& label) {
  const ValidationReport rep = validate_density(rho);
  if (!rep.pass)
    throw ValidationError(label + ": density validation failed (herm " +
                          std::to_string(rep.hermiticity_defect) + ", min ev " +
                          std::to_string(rep.min_eigenvalue) + ", trace defect " +
                          std::to_string(rep.trace_defect) + ")");
}

double purity(const FockDensityMatrix& rho) {
  // tr[rho^2] equals the squared Frobenius norm for Hermitian rho.
  return rho.m.squaredNorm();
}

double fidelity_pure(const CVec& psi, const FockDensityMatrix& rho) {
  return (psi.adjoint() * rho.m * psi)(0, 0).real();
}

double mean_photon_number(const FockDensityMatrix& rho) {
  double acc = 0.0;
  for (int n = 0; n < rho.dim(); ++n) acc += n * rho.m(n, n).real();
  return acc;
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

FockDensityMatrix vacuum_density(const TruncationBudget& budget) {
  return fock_density(0, budget);
}

FockDensityMatrix fock_density(int n, const TruncationBudget& budget) {
  budget.validate();
  if (n < 0 || n > budget.cutoff)
    throw DomainError("photon number outside the truncation window");
  FockDensityMatrix rho{CMat::Zero(budget.dim(), budget.dim()), budget};
  rho.m(n, n) = 1.0;
  return rho;
}

FockDensityMatrix pure_density(const CVec& psi, const TruncationBudget& budget) {
  budget.validate();
  if (psi.size() != budget.dim())
    throw DomainError("state vector length does not match budget");
  FockDensityMatrix rho{psi * psi.adjoint(), budget};
  return rho;
}

FockDensityMatrix coherent_density(cxd z, const TruncationBudget& budget) {
  const FockVector v = coherent_fock_coefficients(z, budget);
  return pure_density(v.c, budget);
}

FockDensityMatrix superposition_density(const CoherentSuperposition& s,
                                        const TruncationBudget& budget) {
  budget.validate();
  if (s.terms.empty()) throw DomainError("empty superposition");
  CVec psi = CVec::Zero(budget.dim());
  for (const auto& t : s.terms)
    psi += t.coeff * coherent_fock_coefficients_unchecked(t.amplitude,
                                                          budget.dim()).c;
  const double captured = psi.squaredNorm();
  const double exact = s.norm_squared();
  if (std::abs(exact - captured) > budget.tail_tol * std::max(1.0, exact))
    throw TruncationInsufficient("superposition leaks mass past cutoff");
  return pure_density(psi, budget);
}

CoherentSuperposition cat_superposition(cxd a, cxd b, cxd ca, cxd cb) {
  CoherentSuperposition s{{CoherentTerm{ca, a}, CoherentTerm{cb, b}}};
  s.normalize();
  return s;
}

}  // namespace hdsim
