#include "hdsim/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hdsim/complex_erf.hpp"
#include "hdsim/detector.hpp"
#include "hdsim/fock.hpp"
#include "hdsim/math.hpp"
#include "hdsim/parallel.hpp"

namespace hdsim {

SmearKernel1D SmearKernel1D::from_efficiencies(Efficiency e1, Efficiency e2) {
  e1.validate();
  e2.validate();
  SmearKernel1D k;
  k.eps1 = e1;
  k.eps2 = e2;
  k.kind = (e1.ideal() && e2.ideal()) ? Kind::Dirac : Kind::Gaussian;
  return k;
}

double SmearKernel1D::variance() const {
  if (kind == Kind::Dirac) return 0.0;
  const double e1 = eps1.value, e2 = eps2.value;
  return (e1 + e2 - 2.0 * e1 * e2) / (4.0 * e1 * e2);
}

void ConvergenceSchedule::validate() const {
  if (amplitudes.empty()) throw DomainError("empty amplitude schedule");
  double prev = 0.0;
  for (double r : amplitudes) {
    if (!(r > prev)) throw DomainError("amplitudes must increase and be > 0");
    prev = r;
  }
  if (t_grid.empty()) throw DomainError("empty t grid");
}

std::pair<cxd, cxd> beam_splitter_map(cxd a, cxd b) {
  const double s = 1.0 / std::sqrt(2.0);
  return {(a - b) * s, (a + b) * s};
}

double outcome_value(int m, int n, double r, Efficiency eps1,
                     Efficiency eps2) {
  return (n / eps2.value - m / eps1.value) / (std::sqrt(2.0) * r);
}

// ---------------------------------------------------------------------------
// Exact finite-LO distribution
// ---------------------------------------------------------------------------

ScaledDifferenceDistribution finite_z_distribution(
    const CoherentSuperposition& signal, const LocalOscillator& lo,
    Efficiency eps1, Efficiency eps2, const TruncationBudget& budget) {
  lo.validate();
  eps1.validate();
  eps2.validate();
  budget.validate();
  if (signal.terms.empty()) throw DomainError("empty signal superposition");

  const cxd z = lo.z();
  const double s = 1.0 / std::sqrt(2.0);
  // Per-mode Poisson means of the diagonal terms set the lattice bounds.
  double mean1 = 0.0, mean2 = 0.0;
  for (const auto& t : signal.terms) {
    mean1 = std::max(mean1, eps1.value * std::norm((t.amplitude - z) * s));
    mean2 = std::max(mean2, eps2.value * std::norm((t.amplitude + z) * s));
  }
  const double per_mode_tol = 1e-12;
  const int m_max = poisson_tail_bound(mean1, per_mode_tol);
  const int n_max = poisson_tail_bound(mean2, per_mode_tol);
  if (static_cast<long long>(m_max + 1) * (n_max + 1) > 10000000LL)
    throw TruncationInsufficient("outcome lattice exceeds 1e7 points");

  // Per-term kernel factors, indexed [term_i][term_j].
  const size_t T = signal.terms.size();
  std::vector<std::vector<std::vector<cxd>>> k1(T), k2(T);
  for (size_t i = 0; i < T; ++i) {
    k1[i].resize(T);
    k2[i].resize(T);
    for (size_t j = 0; j < T; ++j) {
      const cxd gi = (signal.terms[i].amplitude - z) * s;
      const cxd gj = (signal.terms[j].amplitude - z) * s;
      const cxd di = (signal.terms[i].amplitude + z) * s;
      const cxd dj = (signal.terms[j].amplitude + z) * s;
      k1[i][j].resize(m_max + 1);
      k2[i][j].resize(n_max + 1);
      for (int m = 0; m <= m_max; ++m)
        k1[i][j][m] = coherent_count_kernel(eps1, m, gi, gj);
      for (int n = 0; n <= n_max; ++n)
        k2[i][j][n] = coherent_count_kernel(eps2, n, di, dj);
    }
  }

  std::vector<ScaledDifferenceAtom> atoms;
  atoms.reserve(static_cast<size_t>(m_max + 1) * (n_max + 1));
  for (int m = 0; m <= m_max; ++m) {
    for (int n = 0; n <= n_max; ++n) {
      cxd acc(0.0, 0.0);
      for (size_t i = 0; i < T; ++i)
        for (size_t j = 0; j < T; ++j)
          acc += std::conj(signal.terms[i].coeff) * signal.terms[j].coeff *
                 k1[i][j][m] * k2[i][j][n];
      const double p = std::max(0.0, acc.real());
      if (p > 0.0)
        atoms.push_back({outcome_value(m, n, lo.r, eps1, eps2), p});
    }
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const ScaledDifferenceAtom& a, const ScaledDifferenceAtom& b) {
              return a.outcome < b.outcome;
            });
  // Merge outcomes that coincide up to 1e-12 (the outcome set is a set, not
  // a multiset; rational efficiency ratios create exact collisions).
  ScaledDifferenceDistribution out;
  for (const auto& a : atoms) {
    if (!out.atoms.empty() &&
        std::abs(out.atoms.back().outcome - a.outcome) <= 1e-12) {
      out.atoms.back().probability += a.probability;
    } else {
      out.atoms.push_back(a);
    }
  }
  double total = 0.0;
  for (const auto& a : out.atoms) total += a.probability;
  out.tail_mass = std::max(0.0, 1.0 - total);
  if (out.tail_mass > std::max(budget.tail_tol, 1e-9))
    throw TruncationInsufficient("scaled-difference tail mass " +
                                 std::to_string(out.tail_mass));
  return out;
}

// ---------------------------------------------------------------------------
// Characteristic functions
// ---------------------------------------------------------------------------

cxd finite_z_char_fn(cxd alpha, cxd beta, const LocalOscillator& lo,
                     Efficiency eps1, Efficiency eps2, double t) {
  lo.validate();
  eps1.validate();
  eps2.validate();
  const cxd z = lo.z();
  const double e1 = eps1.value, e2 = eps2.value;
  const double s2r = std::sqrt(2.0) * lo.r;
  // Count sums collapse to exponentials; the remaining factors are grouped
  // so the O(t/r) differences are evaluated without cancellation.
  const cxd one_minus_u = one_minus_exp_i(-t / (s2r * e1));
  const cxd one_minus_v = one_minus_exp_i(+t / (s2r * e2));
  const cxd f1 = -0.5 * e1 * (std::conj(alpha) - std::conj(z)) * (beta - z) *
                 one_minus_u;
  const cxd f2 = -0.5 * e2 * (std::conj(alpha) + std::conj(z)) * (beta + z) *
                 one_minus_v;
  return coherent_overlap(alpha, beta) * std::exp(f1 + f2);
}

cxd finite_z_char_fn(const CoherentSuperposition& signal,
                     const LocalOscillator& lo, Efficiency eps1,
                     Efficiency eps2, double t) {
  cxd acc(0.0, 0.0);
  for (const auto& ti : signal.terms)
    for (const auto& tj : signal.terms)
      acc += std::conj(ti.coeff) * tj.coeff *
             finite_z_char_fn(ti.amplitude, tj.amplitude, lo, eps1, eps2, t);
  return acc;
}

cxd limit_char_fn(cxd alpha, cxd beta, double theta, Efficiency eps1,
                  Efficiency eps2, double t) {
  eps1.validate();
  eps2.validate();
  const cxd eith = std::exp(cxd(0.0, theta));
  const cxd mean = (std::conj(alpha) * eith + beta / eith) / std::sqrt(2.0);
  const double width = (1.0 / eps1.value + 1.0 / eps2.value) / 8.0;
  return coherent_overlap(alpha, beta) * std::exp(cxd(0.0, t) * mean) *
         std::exp(-t * t * width);
}

cxd limit_char_fn(const CoherentSuperposition& signal, double theta,
                  Efficiency eps1, Efficiency eps2, double t) {
  cxd acc(0.0, 0.0);
  for (const auto& ti : signal.terms)
    for (const auto& tj : signal.terms)
      acc += std::conj(ti.coeff) * tj.coeff *
             limit_char_fn(ti.amplitude, tj.amplitude, theta, eps1, eps2, t);
  return acc;
}

cxd quadratic_limit_probe(double a, double b, double x) {
  if (a == 0.0 || b == 0.0) throw DomainError("probe requires a, b != 0");
  if (!(x > 0.0)) throw DomainError("probe requires x > 0");
  const cxd ta = a * x * x * one_minus_exp_i(-1.0 / (a * x));
  const cxd tb = b * x * x * one_minus_exp_i(+1.0 / (b * x));
  return ta + tb;
}

double quadratic_limit_value(double a, double b) {
  if (a == 0.0 || b == 0.0) throw DomainError("limit requires a, b != 0");
  return 0.5 * (1.0 / a + 1.0 / b);
}

// ---------------------------------------------------------------------------
// Kernel and smeared quadrature statistics
// ---------------------------------------------------------------------------

double gaussian_kernel_density(const SmearKernel1D& k, double x) {
  if (k.kind == SmearKernel1D::Kind::Dirac)
    throw KindError("Dirac kernel has no density");
  const double e1 = k.eps1.value, e2 = k.eps2.value;
  const double denom = e1 - 2.0 * e1 * e2 + e2;
  return std::sqrt(2.0 * e1 * e2 / (M_PI * denom)) *
         std::exp(-2.0 * e1 * e2 * x * x / denom);
}

namespace {

// Gaussian matrix-element density of the smeared rotated quadrature:
// overlap * normal(mean M_ij (complex), variance Sigma) where
// Sigma = 1/2 + kernel variance.
struct BilinearGaussian {
  cxd weight;  // conj(ci) cj <ai|aj>
  cxd mean;
  double var;
};

std::vector<BilinearGaussian> bilinear_gaussians(
    const CoherentSuperposition& signal, double theta,
    const SmearKernel1D& k) {
  const double var = 0.5 + k.variance();
  const cxd eith = std::exp(cxd(0.0, theta));
  std::vector<BilinearGaussian> out;
  out.reserve(signal.terms.size() * signal.terms.size());
  for (const auto& ti : signal.terms)
    for (const auto& tj : signal.terms) {
      BilinearGaussian g;
      g.weight = std::conj(ti.coeff) * tj.coeff *
                 coherent_overlap(ti.amplitude, tj.amplitude);
      g.mean = (std::conj(ti.amplitude) * eith + tj.amplitude / eith) /
               std::sqrt(2.0);
      g.var = var;
      out.push_back(g);
    }
  return out;
}

}  // namespace

double smeared_quadrature_prob(const CoherentSuperposition& signal,
                               double theta, const SmearKernel1D& k,
                               double x_lo, double x_hi) {
  if (!(x_lo < x_hi)) throw DomainError("interval must satisfy x_lo < x_hi");
  const auto gs = bilinear_gaussians(signal, theta, k);
  cxd acc(0.0, 0.0);
  for (const auto& g : gs) {
    const double s = std::sqrt(2.0 * g.var);
    // CDF differences of a Gaussian with complex mean via complex erf.
    const cxd hi = std::isinf(x_hi) ? cxd(1.0, 0.0)
                                    : erf_complex((x_hi - g.mean) / s);
    const cxd lo = std::isinf(x_lo) ? cxd(-1.0, 0.0)
                                    : erf_complex((x_lo - g.mean) / s);
    acc += g.weight * 0.5 * (hi - lo);
  }
  return std::clamp(acc.real(), -1e-12, 1.0 + 1e-12);
}

double smeared_quadrature_density(const CoherentSuperposition& signal,
                                  double theta, const SmearKernel1D& k,
                                  double x) {
  const auto gs = bilinear_gaussians(signal, theta, k);
  cxd acc(0.0, 0.0);
  for (const auto& g : gs) {
    const cxd d = x - g.mean;
    acc += g.weight * std::exp(-d * d / (2.0 * g.var)) /
           std::sqrt(2.0 * M_PI * g.var);
  }
  return acc.real();
}

// ---------------------------------------------------------------------------
// Convergence harness
// ---------------------------------------------------------------------------

std::vector<ConvergenceRow> convergence_report(
    const CoherentSuperposition& signal, double theta, Efficiency eps1,
    Efficiency eps2, const ConvergenceSchedule& schedule) {
  schedule.validate();
  std::vector<ConvergenceRow> rows;
  rows.reserve(schedule.amplitudes.size());
  for (double r : schedule.amplitudes) {
    const LocalOscillator lo{r, theta};
    const int nt = static_cast<int>(schedule.t_grid.size());
    std::vector<double> errs(nt, 0.0);
    parallel_for(nt, [&](int i) {
      const double t = schedule.t_grid[i];
      const cxd a = finite_z_char_fn(signal, lo, eps1, eps2, t);
      const cxd b = limit_char_fn(signal, theta, eps1, eps2, t);
      errs[i] = std::abs(a - b);
    });
    double sup = 0.0;
    for (double e : errs) sup = std::max(sup, e);
    rows.push_back({r, sup});
  }
  return rows;
}

std::vector<double> sample_finite_z(const ScaledDifferenceDistribution& dist,
                                    int shots, std::uint64_t seed) {
  if (shots < 1) throw DomainError("shots must be >= 1");
  std::vector<double> cdf(dist.atoms.size(), 0.0);
  double acc = 0.0;
  for (size_t i = 0; i < dist.atoms.size(); ++i) {
    acc += dist.atoms[i].probability;
    cdf[i] = acc;
  }
  std::uint64_t state = seed;
  std::mt19937_64 rng(splitmix64_next(state));
  std::uniform_real_distribution<double> uni(0.0, acc);
  std::vector<double> out(shots, 0.0);
  for (int s = 0; s < shots; ++s) {
    const double u = uni(rng);
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const size_t idx = it == cdf.end() ? cdf.size() - 1 : it - cdf.begin();
    out[s] = dist.atoms[idx].outcome;
  }
  return out;
}

}  // namespace hdsim
