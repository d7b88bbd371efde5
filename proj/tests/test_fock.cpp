#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "hdsim/fock.hpp"
#include "hdsim/math.hpp"

using namespace hdsim;

namespace {
void check_close(cxd got, cxd want, double tol) {
  CAPTURE(got.real());
  CAPTURE(got.imag());
  CAPTURE(want.real());
  CAPTURE(want.imag());
  CHECK(std::abs(got - want) <= tol * (1.0 + std::abs(want)));
}
}  // namespace

TEST_CASE("coherent coefficients match the closed form") {
  const auto v = coherent_fock_coefficients(cxd(1.0, 0.0),
                                            TruncationBudget{30, 1e-10});
  // c_2 = e^{-1/2} / sqrt(2)
  check_close(v.c(2), cxd(0.42888194248035339824, 0.0), 1e-14);
  check_close(v.c(0), cxd(std::exp(-0.5), 0.0), 1e-14);
  double mass = 0.0;
  for (int n = 0; n < v.dim(); ++n) mass += std::norm(v.c(n));
  CHECK(mass + v.leaked_mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coherent coefficients reject an impossible budget") {
  CHECK_THROWS_AS(
      coherent_fock_coefficients(cxd(1.0, 0.0), TruncationBudget{0, 1e-6}),
      TruncationInsufficient);
}

TEST_CASE("cutoff rule |z|^2 + 6|z| + 9 keeps the leak below 1e-6") {
  const cxd z(2.0, 0.0);  // |z|^2 + 6|z| + 9 = 25
  const auto v = coherent_fock_coefficients(z, TruncationBudget{25, 1e-6});
  CHECK(v.leaked_mass <= 1e-6);
  // complex amplitude of the same modulus obeys the same rule
  const auto w =
      coherent_fock_coefficients(cxd(1.2, -1.6), TruncationBudget{25, 1e-6});
  CHECK(w.leaked_mass <= 1e-6);
}

TEST_CASE("coherent overlaps") {
  const cxd a(0.7, -0.4), b(-1.1, 0.3);
  check_close(coherent_overlap(a, a), cxd(1.0, 0.0), 1e-14);
  CHECK(std::norm(coherent_overlap(a, b)) ==
        doctest::Approx(std::exp(-std::norm(a - b))).epsilon(1e-13));
  check_close(coherent_overlap(a, b), std::conj(coherent_overlap(b, a)),
              1e-14);
  // overlap equals the truncated coefficient inner product up to the leak
  const auto va = coherent_fock_coefficients_unchecked(a, 40);
  const auto vb = coherent_fock_coefficients_unchecked(b, 40);
  cxd ip(0.0, 0.0);
  for (int n = 0; n < 40; ++n) ip += std::conj(va.c(n)) * vb.c(n);
  check_close(ip, coherent_overlap(a, b), 1e-12);
}

TEST_CASE("coherent position density and cross terms") {
  const cxd z(0.8, 0.0);
  const double x = 0.3;
  const double direct =
      std::exp(-(x - std::sqrt(2.0) * 0.8) * (x - std::sqrt(2.0) * 0.8)) /
      std::sqrt(M_PI);
  CHECK(coherent_position_density(z, x) ==
        doctest::Approx(direct).epsilon(1e-13));
  check_close(coherent_position_cross(z, z, x), cxd(direct, 0.0), 1e-13);
  // normalization
  double mass = 0.0;
  const double h = 1e-3;
  for (double t = -12.0; t <= 12.0; t += h)
    mass += coherent_position_density(cxd(0.4, 1.1), t) * h;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("two-lobe superposition position density from cross terms") {
  const auto cat = cat_superposition(cxd(0.8, 0.0), cxd(-0.8, 0.0), 1.0, 1.0);
  // normalization constant 1 / sqrt(2 + 2 e^{-1.28})
  const double n2 = 2.0 + 2.0 * std::exp(-1.28);
  CHECK(cat.norm_squared() == doctest::Approx(1.0).epsilon(1e-13));
  const double x = 0.3;
  cxd acc(0.0, 0.0);
  for (const auto& ti : cat.terms)
    for (const auto& tj : cat.terms)
      acc += ti.coeff * std::conj(tj.coeff) *
             coherent_position_cross(ti.amplitude, tj.amplitude, x);
  const double s2 = std::sqrt(2.0);
  const double psi = (std::exp(-0.5 * (x - s2 * 0.8) * (x - s2 * 0.8)) +
                      std::exp(-0.5 * (x + s2 * 0.8) * (x + s2 * 0.8))) /
                     std::pow(M_PI, 0.25);
  const double want = psi * psi / n2;
  CHECK(acc.real() == doctest::Approx(want).epsilon(1e-12));
  CHECK(std::abs(acc.imag()) < 1e-14);
}

TEST_CASE("displacement matrix elements: exact anchors at q=1, p=0.5") {
  const cxd alpha = cxd(1.0, 0.5) / std::sqrt(2.0);
  check_close(displacement_entry(0, 0, alpha),
              cxd(0.73161562894664179116, 0.0), 1e-13);
  check_close(displacement_entry(3, 5, alpha),
              cxd(0.28746812886541877988, -0.38329083848722503984), 1e-13);
  check_close(displacement_entry(7, 2, alpha),
              cxd(-0.05146066491110003666, 0.055523348983028986922), 1e-13);
  check_close(displacement_entry(10, 10, alpha),
              cxd(-0.14072938454943238231, 0.0), 1e-13);
  check_close(displacement_entry(40, 38, alpha),
              cxd(0.15283512231210193688, 0.20378016308280258251), 1e-12);
  // far off-diagonal entry, magnitude ~1e-9: relative accuracy must survive
  const cxd v = displacement_entry(25, 5, alpha);
  check_close(v, cxd(-8.3535439675973877914e-10, 1.2781191301406308763e-10),
              1e-11);
}

TEST_CASE("displacement special cases and consistency") {
  // alpha = 0 is the identity
  check_close(displacement_entry(4, 4, cxd(0.0, 0.0)), cxd(1.0, 0.0), 0.0);
  check_close(displacement_entry(4, 3, cxd(0.0, 0.0)), cxd(0.0, 0.0), 0.0);
  // first column of D(alpha) is the coherent vector
  const cxd alpha(0.6, -0.9);
  const auto col = coherent_fock_coefficients_unchecked(alpha, 25);
  const CMat D = displacement_matrix_alpha(alpha, 25);
  for (int m = 0; m < 25; ++m) check_close(D(m, 0), col.c(m), 1e-13);
  // adjoint symmetry D(alpha)^dag = D(-alpha)
  const CMat Dm = displacement_matrix_alpha(-alpha, 25);
  for (int m = 0; m < 12; ++m)
    for (int n = 0; n < 12; ++n)
      check_close(std::conj(D(n, m)), Dm(m, n), 1e-13);
}

TEST_CASE("truncated displacement is unitary on the interior block") {
  const cxd alpha(0.7, 0.2);
  const CMat D = displacement_matrix_alpha(alpha, 61);
  const CMat G = D.adjoint() * D;
  for (int m = 0; m <= 20; ++m)
    for (int n = 0; n <= 20; ++n) {
      const cxd want = (m == n) ? cxd(1.0, 0.0) : cxd(0.0, 0.0);
      CHECK(std::abs(G(m, n) - want) < 1e-10);
    }
}

TEST_CASE("phase-space translation ground-state form factor") {
  for (auto [q, p] : {std::pair{0.7, -1.2}, {0.0, 0.0}, {2.0, 3.0}}) {
    const cxd v = weyl_entry(0, 0, q, p);
    check_close(v, cxd(std::exp(-(q * q + p * p) / 4.0), 0.0), 1e-13);
    check_close(v, displacement_entry(0, 0, cxd(q, p) / std::sqrt(2.0)),
                0.0);
  }
  // the batch builder (column recurrence) and the per-entry closed form are
  // independent exact algorithms; agreement is to rounding, not bitwise
  const TruncationBudget b{20, 1e-10};
  const CMat W = displacement_matrix(0.9, -0.4, b);
  for (int m = 0; m < 8; ++m)
    for (int n = 0; n < 8; ++n)
      check_close(W(m, n), weyl_entry(m, n, 0.9, -0.4), 1e-13);
}

TEST_CASE("displacement leakage is small inside the window, large outside") {
  CHECK(displacement_leakage(1.0, 0.5, 40) < 1e-12);
  CHECK(displacement_leakage(11.0, 0.0, 20) > 0.5);
}

TEST_CASE("number-phase rotation maps coherent states to rotated labels") {
  const cxd z(0.9, 0.4);
  const double theta = 0.77;
  const TruncationBudget b{30, 1e-8};
  const auto rotated = rotate_state(coherent_density(z, b), theta);
  const auto direct = coherent_density(z * std::exp(cxd(0.0, theta)), b);
  CHECK((rotated.m - direct.m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("density validation accepts states and rejects defects") {
  const TruncationBudget b{12, 1e-10};
  const auto vac = vacuum_density(b);
  const auto rep = validate_density(vac);
  CHECK(rep.pass);
  CHECK(rep.hermiticity_defect < 1e-15);
  CHECK(rep.trace_defect < 1e-12);

  FockDensityMatrix bad = vac;
  bad.m(0, 1) = cxd(0.3, 0.0);  // not hermitian
  CHECK_FALSE(validate_density(bad).pass);
  CHECK_THROWS_AS(require_valid_density(bad, "test"), ValidationError);

  FockDensityMatrix neg = vac;
  neg.m(0, 0) = 1.5;
  neg.m(1, 1) = -0.5;  // negative eigenvalue, trace 1
  const auto nrep = validate_density(neg);
  CHECK_FALSE(nrep.pass);
  CHECK(nrep.min_eigenvalue == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("purity, fidelity and photon number functionals") {
  const TruncationBudget b{40, 1e-10};
  const cxd z(1.1, -0.7);
  const auto rho = coherent_density(z, b);
  CHECK(purity(rho) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(mean_photon_number(rho) ==
        doctest::Approx(std::norm(z)).epsilon(1e-10));
  const auto v = coherent_fock_coefficients(z, b);
  CHECK(fidelity_pure(v.c, rho) == doctest::Approx(1.0).epsilon(1e-10));

  const auto one = fock_density(3, b);
  CHECK(mean_photon_number(one) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(purity(one) == doctest::Approx(1.0).epsilon(1e-13));

  FockDensityMatrix mixed = vacuum_density(b);
  mixed.m(0, 0) = 0.5;
  mixed.m(1, 1) = 0.5;
  CHECK(purity(mixed) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("superposition density: trace one, positive, fails small cutoffs") {
  const auto cat = cat_superposition(cxd(0.8, 0.0), cxd(-0.8, 0.0), 1.0, 1.0);
  const TruncationBudget b{30, 1e-8};
  const auto rho = superposition_density(cat, b);
  const auto rep = validate_density(rho);
  CHECK(rep.pass);
  CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(purity(rho) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK_THROWS_AS(superposition_density(
                      cat_superposition(cxd(3.0, 0.0), cxd(-3.0, 0.0), 1.0,
                                        1.0),
                      TruncationBudget{2, 1e-8}),
                  TruncationInsufficient);
}

TEST_CASE("pure_density builds the projector of a unit vector") {
  const TruncationBudget b{5, 1e-10};
  CVec psi = CVec::Zero(6);
  psi(0) = std::sqrt(0.25);
  psi(3) = cxd(0.0, std::sqrt(0.75));
  const auto rho = pure_density(psi, b);
  CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(rho.m(3, 3).real() == doctest::Approx(0.75).epsilon(1e-13));
  check_close(rho.m(0, 3), psi(0) * std::conj(psi(3)), 1e-13);
  CHECK(fidelity_pure(psi, rho) == doctest::Approx(1.0).epsilon(1e-13));
}
