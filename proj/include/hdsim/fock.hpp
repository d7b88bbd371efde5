#pragma once

#include "hdsim/types.hpp"

namespace hdsim {

// ---------------------------------------------------------------------------
// Coherent states
// ---------------------------------------------------------------------------

// Number-basis coefficients c_n = e^{-|z|^2/2} z^n / sqrt(n!) for n up to
// budget.cutoff. Throws TruncationInsufficient when the mass left beyond the
// cutoff exceeds budget.tail_tol.
FockVector coherent_fock_coefficients(cxd z, const TruncationBudget& budget);

// Same coefficients without the tail check (leaked mass still reported).
FockVector coherent_fock_coefficients_unchecked(cxd z, int dim);

// <a|b> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b), exact.
cxd coherent_overlap(cxd a, cxd b);

// |psi_z(x)|^2 = pi^{-1/2} e^{-(x - sqrt(2) Re z)^2}: position density of a
// coherent state.
double coherent_position_density(cxd z, double x);

// psi_z(x) * conj(psi_w(x)): cross term of two coherent position
// wavefunctions, for superposition densities.
cxd coherent_position_cross(cxd z, cxd w, double x);

// ---------------------------------------------------------------------------
// Displacements / phase-space translations
// ---------------------------------------------------------------------------

// Matrix element <m| D(alpha) |n> of the displacement operator
// D(alpha) = exp(alpha a^dag - conj(alpha) a), via the closed-form
// associated-Laguerre expression. Exact per entry, independent of cutoff.
cxd displacement_entry(int m, int n, cxd alpha);

// Truncated matrix of D(alpha).
CMat displacement_matrix_alpha(cxd alpha, int dim);

// Phase-space translation operator W_{q,p} = e^{iqp/2} e^{-iqP} e^{ipQ};
// equals D((q+ip)/sqrt(2)) and satisfies <0|W_{q,p}|0> = e^{-(q^2+p^2)/4}.
CMat displacement_matrix(double q, double p, const TruncationBudget& budget);
cxd weyl_entry(int m, int n, double q, double p);

// Fraction of |z+displacement|-type mass the truncated matrix fails to hold:
// 1 - ||W column_0||^2 measured on the truncated space.
double displacement_leakage(double q, double p, int dim);

// ---------------------------------------------------------------------------
// Rotations, validation, functionals
// ---------------------------------------------------------------------------

// e^{i theta N} rho e^{-i theta N}; entries pick up phases e^{i theta (m-n)}.
FockDensityMatrix rotate_state(const FockDensityMatrix& rho, double theta);

// Hermiticity / positivity / trace diagnostic. Trace tolerance is
// max(1e-10, budget.tail_tol) so legitimately truncated states pass.
ValidationReport validate_density(const FockDensityMatrix& rho);

// Throwing wrapper around validate_density.
void require_valid_density(const FockDensityMatrix& rho,
                           const std::string& label);

// tr[rho^2].
double purity(const FockDensityMatrix& rho);

// <psi| rho |psi> for a pure reference state.
double fidelity_pure(const CVec& psi, const FockDensityMatrix& rho);

// tr[rho N].
double mean_photon_number(const FockDensityMatrix& rho);

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

FockDensityMatrix vacuum_density(const TruncationBudget& budget);
FockDensityMatrix fock_density(int n, const TruncationBudget& budget);
FockDensityMatrix pure_density(const CVec& psi, const TruncationBudget& budget);
FockDensityMatrix coherent_density(cxd z, const TruncationBudget& budget);

// Density matrix of a finite coherent superposition (normalized input).
FockDensityMatrix superposition_density(const CoherentSuperposition& s,
                                        const TruncationBudget& budget);

// Normalized  ca|a> + cb|b>  two-term superposition.
CoherentSuperposition cat_superposition(cxd a, cxd b, cxd ca, cxd cb);

}  // namespace hdsim
