#include "hdsim/eightport.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <random>

#include <Eigen/Eigenvalues>

#include "hdsim/detector.hpp"
#include "hdsim/fock.hpp"
#include "hdsim/homodyne.hpp"
#include "hdsim/math.hpp"
#include "hdsim/parallel.hpp"
#include "hdsim/tomography.hpp"

namespace hdsim {

// ---------------------------------------------------------------------------
// Kernel type
// ---------------------------------------------------------------------------

SmearKernel2D SmearKernel2D::from_efficiencies(Efficiency e1, Efficiency e2,
                                               Efficiency e3, Efficiency e4) {
  SmearKernel2D k;
  k.kx = SmearKernel1D::from_efficiencies(e1, e3);
  k.ky = SmearKernel1D::from_efficiencies(e2, e4);
  return k;
}

SmearKernel2D SmearKernel2D::dirac() {
  return from_efficiencies(Efficiency{1.0}, Efficiency{1.0}, Efficiency{1.0},
                           Efficiency{1.0});
}

double SmearKernel2D::variance_x() const { return 2.0 * kx.variance(); }
double SmearKernel2D::variance_y() const { return 2.0 * ky.variance(); }

bool SmearKernel2D::fully_dirac() const {
  return kx.kind == SmearKernel1D::Kind::Dirac &&
         ky.kind == SmearKernel1D::Kind::Dirac;
}

double kernel2d_density(const SmearKernel2D& k, double x, double y) {
  const double s = 1.0 / std::sqrt(2.0);
  return 0.5 * gaussian_kernel_density(k.kx, x * s) *
         gaussian_kernel_density(k.ky, y * s);
}

// ---------------------------------------------------------------------------
// Network reduction
// ---------------------------------------------------------------------------

std::vector<ReducedTerm> reduce_to_double_homodyne(
    const CoherentSuperposition& rho, const CoherentSuperposition& S,
    const EightPortConfig& cfg) {
  cfg.validate();
  if (rho.terms.empty() || S.terms.empty())
    throw UnsupportedState("empty coherent expansion");
  std::vector<ReducedTerm> out;
  out.reserve(rho.terms.size() * rho.terms.size() * S.terms.size() *
              S.terms.size());
  for (const auto& ri : rho.terms)
    for (const auto& rj : rho.terms)
      for (const auto& sk : S.terms)
        for (const auto& sl : S.terms) {
          ReducedTerm t;
          t.weight = std::conj(ri.coeff) * rj.coeff * std::conj(sk.coeff) *
                     sl.coeff;
          const auto bra = beam_splitter_map(ri.amplitude, sk.amplitude);
          const auto ket = beam_splitter_map(rj.amplitude, sl.amplitude);
          t.arm1_bra = bra.first;
          t.arm1_ket = ket.first;
          t.arm2_bra = bra.second;
          t.arm2_ket = ket.second;
          out.push_back(t);
        }
  return out;
}

// ---------------------------------------------------------------------------
// Exact joint statistics
// ---------------------------------------------------------------------------

namespace {

// One homodyne arm of the reduced problem: LO label, efficiencies of its
// (minus, plus) detector pair, and the count bounds covering every term.
struct ArmLattice {
  cxd z;
  Efficiency eps_minus, eps_plus;
  int m_max = 0, n_max = 0;
};

ArmLattice make_arm(const std::vector<ReducedTerm>& terms, bool arm1, cxd z,
                    Efficiency eps_minus, Efficiency eps_plus) {
  ArmLattice a;
  a.z = z;
  a.eps_minus = eps_minus;
  a.eps_plus = eps_plus;
  const double s = 1.0 / std::sqrt(2.0);
  double mean_m = 0.0, mean_p = 0.0;
  for (const auto& t : terms) {
    for (cxd u : {arm1 ? t.arm1_bra : t.arm2_bra,
                  arm1 ? t.arm1_ket : t.arm2_ket}) {
      mean_m = std::max(mean_m, eps_minus.value * std::norm((u - z) * s));
      mean_p = std::max(mean_p, eps_plus.value * std::norm((u + z) * s));
    }
  }
  a.m_max = poisson_tail_bound(mean_m, 1e-12);
  a.n_max = poisson_tail_bound(mean_p, 1e-12);
  return a;
}

// Joint-scaled outcome of one arm: sqrt(2) times the arm's scaled
// count-difference statistic.
double arm_outcome(const ArmLattice& a, int m, int n, double r) {
  return std::sqrt(2.0) *
         outcome_value(m, n, r, a.eps_minus, a.eps_plus);
}

// Merged outcome axis plus, per reduced term, the complex bilinear weight
// attached to each merged outcome.
struct ArmBilinear {
  std::vector<double> outcomes;             // sorted, merged (tol 1e-12)
  std::vector<std::vector<cxd>> term_amp;   // [term][outcome index]
};

ArmBilinear arm_bilinear(const std::vector<ReducedTerm>& terms, bool arm1,
                         const ArmLattice& a, double r) {
  const double s = 1.0 / std::sqrt(2.0);
  // Merged axis from the (m,n) lattice.
  std::vector<std::pair<double, std::pair<int, int>>> pts;
  pts.reserve(static_cast<size_t>(a.m_max + 1) * (a.n_max + 1));
  for (int m = 0; m <= a.m_max; ++m)
    for (int n = 0; n <= a.n_max; ++n)
      pts.push_back({arm_outcome(a, m, n, r), {m, n}});
  std::sort(pts.begin(), pts.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  ArmBilinear out;
  std::vector<int> merged_index(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    if (out.outcomes.empty() ||
        std::abs(out.outcomes.back() - pts[i].first) > 1e-12)
      out.outcomes.push_back(pts[i].first);
    merged_index[i] = static_cast<int>(out.outcomes.size()) - 1;
  }
  out.term_amp.assign(terms.size(),
                      std::vector<cxd>(out.outcomes.size(), cxd(0.0, 0.0)));
  for (size_t t = 0; t < terms.size(); ++t) {
    const cxd bra = arm1 ? terms[t].arm1_bra : terms[t].arm2_bra;
    const cxd ket = arm1 ? terms[t].arm1_ket : terms[t].arm2_ket;
    std::vector<cxd> km(a.m_max + 1), kp(a.n_max + 1);
    for (int m = 0; m <= a.m_max; ++m)
      km[m] = coherent_count_kernel(a.eps_minus, m, (bra - a.z) * s,
                                    (ket - a.z) * s);
    for (int n = 0; n <= a.n_max; ++n)
      kp[n] = coherent_count_kernel(a.eps_plus, n, (bra + a.z) * s,
                                    (ket + a.z) * s);
    for (size_t i = 0; i < pts.size(); ++i) {
      const auto [m, n] = pts[i].second;
      out.term_amp[t][merged_index[i]] += km[m] * kp[n];
    }
  }
  return out;
}

}  // namespace

JointOutcomeDistribution joint_finite_distribution(
    const CoherentSuperposition& rho, const CoherentSuperposition& S,
    const EightPortConfig& cfg, const TruncationBudget& budget) {
  budget.validate();
  const auto terms = reduce_to_double_homodyne(rho, S, cfg);
  const cxd z1 = cfg.lo.z();
  const cxd z2 = cfg.lo.z() * std::exp(cxd(0.0, cfg.phase_shift));
  const auto lat1 = make_arm(terms, true, z1, cfg.eps1, cfg.eps3);
  const auto lat2 = make_arm(terms, false, z2, cfg.eps2, cfg.eps4);
  if (static_cast<long long>(lat1.m_max + 1) * (lat1.n_max + 1) > 10000000LL ||
      static_cast<long long>(lat2.m_max + 1) * (lat2.n_max + 1) > 10000000LL)
    throw TruncationInsufficient("per-arm count lattice exceeds 1e7 points");
  const auto b1 = arm_bilinear(terms, true, lat1, cfg.lo.r);
  const auto b2 = arm_bilinear(terms, false, lat2, cfg.lo.r);
  const size_t nx = b1.outcomes.size(), ny = b2.outcomes.size();
  if (static_cast<long long>(nx) * ny > 10000000LL)
    throw TruncationInsufficient("joint outcome lattice exceeds 1e7 points");

  JointOutcomeDistribution out;
  out.atoms.reserve(nx * ny);
  double total = 0.0;
  for (size_t ix = 0; ix < nx; ++ix)
    for (size_t iy = 0; iy < ny; ++iy) {
      cxd acc(0.0, 0.0);
      for (size_t t = 0; t < terms.size(); ++t)
        acc += terms[t].weight * b1.term_amp[t][ix] * b2.term_amp[t][iy];
      const double p = std::max(0.0, acc.real());
      total += p;
      if (p > 0.0)
        out.atoms.push_back({b1.outcomes[ix], b2.outcomes[iy], p});
    }
  out.tail_mass = std::max(0.0, 1.0 - total);
  if (out.tail_mass > std::max(budget.tail_tol, 1e-9))
    throw TruncationInsufficient("joint tail mass " +
                                 std::to_string(out.tail_mass));
  return out;
}

JointCountDistribution joint_count_distribution(
    const CoherentSuperposition& rho, const CoherentSuperposition& S,
    const EightPortConfig& cfg, const TruncationBudget& budget) {
  budget.validate();
  const auto terms = reduce_to_double_homodyne(rho, S, cfg);
  const cxd z1 = cfg.lo.z();
  const cxd z2 = cfg.lo.z() * std::exp(cxd(0.0, cfg.phase_shift));
  const auto lat1 = make_arm(terms, true, z1, cfg.eps1, cfg.eps3);
  const auto lat2 = make_arm(terms, false, z2, cfg.eps2, cfg.eps4);
  const long long cells = static_cast<long long>(lat1.m_max + 1) *
                          (lat1.n_max + 1) * (lat2.m_max + 1) *
                          (lat2.n_max + 1);
  if (cells > 2000000LL)
    throw TruncationInsufficient("count 4-tuple lattice exceeds 2e6 points");

  const double s = 1.0 / std::sqrt(2.0);
  const size_t T = terms.size();
  // Per-term per-detector kernel tables.
  std::vector<std::vector<cxd>> k1(T), k3(T), k2(T), k4(T);
  for (size_t t = 0; t < T; ++t) {
    k1[t].resize(lat1.m_max + 1);
    k3[t].resize(lat1.n_max + 1);
    k2[t].resize(lat2.m_max + 1);
    k4[t].resize(lat2.n_max + 1);
    for (int m = 0; m <= lat1.m_max; ++m)
      k1[t][m] = coherent_count_kernel(cfg.eps1, m,
                                       (terms[t].arm1_bra - z1) * s,
                                       (terms[t].arm1_ket - z1) * s);
    for (int n = 0; n <= lat1.n_max; ++n)
      k3[t][n] = coherent_count_kernel(cfg.eps3, n,
                                       (terms[t].arm1_bra + z1) * s,
                                       (terms[t].arm1_ket + z1) * s);
    for (int m = 0; m <= lat2.m_max; ++m)
      k2[t][m] = coherent_count_kernel(cfg.eps2, m,
                                       (terms[t].arm2_bra - z2) * s,
                                       (terms[t].arm2_ket - z2) * s);
    for (int n = 0; n <= lat2.n_max; ++n)
      k4[t][n] = coherent_count_kernel(cfg.eps4, n,
                                       (terms[t].arm2_bra + z2) * s,
                                       (terms[t].arm2_ket + z2) * s);
  }

  JointCountDistribution out;
  double total = 0.0;
  for (int a = 0; a <= lat1.m_max; ++a)
    for (int b = 0; b <= lat2.m_max; ++b)
      for (int c = 0; c <= lat1.n_max; ++c)
        for (int d = 0; d <= lat2.n_max; ++d) {
          cxd acc(0.0, 0.0);
          for (size_t t = 0; t < T; ++t)
            acc += terms[t].weight * k1[t][a] * k2[t][b] * k3[t][c] *
                   k4[t][d];
          const double p = std::max(0.0, acc.real());
          total += p;
          if (p > 1e-16) out.atoms[{a, b, c, d}] = p;
        }
  out.tail_mass = std::max(0.0, 1.0 - total);
  if (out.tail_mass > std::max(budget.tail_tol, 1e-9))
    throw TruncationInsufficient("count 4-tuple tail mass " +
                                 std::to_string(out.tail_mass));
  return out;
}

// ---------------------------------------------------------------------------
// Covariant observable densities
// ---------------------------------------------------------------------------

FockDensityMatrix conjugate_generating_operator(const FockDensityMatrix& S) {
  FockDensityMatrix out;
  out.m = S.m.conjugate();
  out.budget = S.budget;
  return out;
}

double covariant_density(const FockDensityMatrix& rho,
                         const FockDensityMatrix& T, double q, double p) {
  if (rho.dim() != T.dim())
    throw DomainError("state and generating operator dimensions differ");
  // Entries of the translation matrix are exact; the guard only rejects
  // points so far out that the window cannot hold the translated operators.
  if (displacement_leakage(q, p, rho.dim()) > 0.5)
    throw TruncationInsufficient("phase-space point too far outside window");
  const CMat W = displacement_matrix(q, p, rho.budget);
  return (rho.m * W * T.m * W.adjoint()).trace().real() / (2.0 * M_PI);
}

PhaseSpaceGrid covariant_density_grid(const FockDensityMatrix& rho,
                                      const FockDensityMatrix& T,
                                      PhaseSpaceGrid grid) {
  if (rho.dim() != T.dim())
    throw DomainError("state and generating operator dimensions differ");
  grid.allocate();
  Eigen::SelfAdjointEigenSolver<CMat> es(T.m);
  const RVec evals = es.eigenvalues();
  const double lmax = evals.cwiseAbs().maxCoeff();
  std::vector<int> kept;
  for (int i = 0; i < evals.size(); ++i)
    if (std::abs(evals(i)) > 1e-14 * lmax) kept.push_back(i);
  const bool rank_path = static_cast<int>(kept.size()) * 3 <= rho.dim();
  const int n_cells = grid.nq * grid.np;
  parallel_for(n_cells, [&](int idx) {
    const int i = idx / grid.np;
    const int j = idx % grid.np;
    const CMat W = displacement_matrix(grid.q(i), grid.p(j), rho.budget);
    double acc = 0.0;
    if (rank_path) {
      for (int k : kept) {
        const CVec w = W * es.eigenvectors().col(k);
        acc += evals(k) * w.dot(rho.m * w).real();
      }
    } else {
      acc = (rho.m * W * T.m * W.adjoint()).trace().real();
    }
    grid.values(i, j) = acc / (2.0 * M_PI);
  });
  return grid;
}

PhaseSpaceGrid limit_density(const FockDensityMatrix& rho,
                             const FockDensityMatrix& S,
                             const SmearKernel2D& k, PhaseSpaceGrid grid) {
  const FockDensityMatrix Tc = conjugate_generating_operator(S);
  PhaseSpaceGrid g = covariant_density_grid(rho, Tc, std::move(grid));
  double boundary = 0.0;
  for (int i = 0; i < g.nq; ++i) {
    boundary = std::max(boundary, std::abs(g.values(i, 0)));
    boundary = std::max(boundary, std::abs(g.values(i, g.np - 1)));
  }
  for (int j = 0; j < g.np; ++j) {
    boundary = std::max(boundary, std::abs(g.values(0, j)));
    boundary = std::max(boundary, std::abs(g.values(g.nq - 1, j)));
  }
  if (boundary > 1e-8)
    std::cerr << "warning: outcome density reaches the grid boundary ("
              << boundary << "); enlarge the window\n";
  if (k.fully_dirac()) return g;
  return forward_smear(g, k);
}

// ---------------------------------------------------------------------------
// Generating-operator convolution
// ---------------------------------------------------------------------------

FockDensityMatrix generating_operator_convolution(const FockDensityMatrix& T,
                                                  const SmearKernel2D& k,
                                                  const TruncationBudget& budget,
                                                  int nodes_per_axis) {
  budget.validate();
  if (nodes_per_axis < 1) throw DomainError("nodes_per_axis must be >= 1");
  if (T.dim() != budget.dim())
    throw DomainError("generating operator does not match the budget");
  if (k.fully_dirac()) return T;

  // Per-axis quadrature points: a Gauss-Hermite rule rescaled to the axis
  // variance, or the single point 0 on a Dirac axis.
  const auto axis_rule = [&](const SmearKernel1D& k1,
                             double var) -> GaussHermiteRule {
    if (k1.kind == SmearKernel1D::Kind::Dirac) {
      GaussHermiteRule r;
      r.nodes = {0.0};
      r.weights = {1.0};
      return r;
    }
    GaussHermiteRule r = gauss_hermite(nodes_per_axis);
    const double scale = std::sqrt(2.0 * var);
    const double wnorm = 1.0 / std::sqrt(M_PI);
    for (auto& t : r.nodes) t *= scale;
    for (auto& w : r.weights) w *= wnorm;
    return r;
  };
  const GaussHermiteRule rx = axis_rule(k.kx, k.variance_x());
  const GaussHermiteRule ry = axis_rule(k.ky, k.variance_y());

  struct Node {
    double q, p, w;
  };
  std::vector<Node> nodes;
  nodes.reserve(rx.nodes.size() * ry.nodes.size());
  for (size_t i = 0; i < rx.nodes.size(); ++i)
    for (size_t j = 0; j < ry.nodes.size(); ++j)
      nodes.push_back({rx.nodes[i], ry.nodes[j],
                       rx.weights[i] * ry.weights[j]});

  const int d = T.dim();
  CMat acc = CMat::Zero(d, d);
  const int chunk = 64;
  std::vector<CMat> partial(std::min<size_t>(chunk, nodes.size()));
  for (size_t base = 0; base < nodes.size(); base += chunk) {
    const int count = static_cast<int>(
        std::min<size_t>(chunk, nodes.size() - base));
    parallel_for(count, [&](int i) {
      const Node& nd = nodes[base + i];
      const CMat W = displacement_matrix(nd.q, nd.p, budget);
      partial[i] = nd.w * (W * T.m * W.adjoint());
    });
    for (int i = 0; i < count; ++i) acc += partial[i];
  }

  const double defect = T.m.trace().real() - acc.trace().real();
  if (std::abs(defect) > std::max(budget.tail_tol, 1e-8))
    throw TruncationInsufficient(
        "smearing pushes operator mass past the cutoff; trace defect " +
        std::to_string(defect));
  FockDensityMatrix out;
  out.m = 0.5 * (acc + acc.adjoint().eval());
  out.budget = budget;
  FockDensityMatrix check = out;
  check.budget.tail_tol = std::max(budget.tail_tol, 1e-8);
  require_valid_density(check, "smeared generating operator");
  return out;
}

// ---------------------------------------------------------------------------
// Structure checks
// ---------------------------------------------------------------------------

PurityReport purity_extremality_check(const FockDensityMatrix& T) {
  Eigen::SelfAdjointEigenSolver<CMat> es(T.m, Eigen::EigenvaluesOnly);
  PurityReport rep;
  rep.largest_eigenvalue = es.eigenvalues().maxCoeff();
  rep.is_pure = rep.largest_eigenvalue >= 1.0 - 1e-9;
  return rep;
}

VacuumDecomposition vacuum_component_decomposition(
    Efficiency eps, const TruncationBudget& budget) {
  budget.validate();
  eps.validate();
  const double e = eps.value;
  if (e == 1.0)
    throw DomainError("decomposition needs a non-ideal common efficiency");
  const int d = budget.dim();
  VacuumDecomposition out;
  out.vacuum_weight = e;
  out.residual.m = CMat::Zero(d, d);
  out.residual.budget = budget;
  out.total.m = CMat::Zero(d, d);
  out.total.budget = budget;
  double geom = 1.0;  // (1-e)^n
  for (int n = 0; n < d; ++n) {
    out.total.m(n, n) = e * geom;
    if (n >= 1) out.residual.m(n, n) = e / (1.0 - e) * geom;
    geom *= 1.0 - e;
  }
  return out;
}

double covariance_check(const FockDensityMatrix& rho,
                        const FockDensityMatrix& T, double q0, double p0,
                        const PhaseSpaceGrid& grid) {
  const double dq = grid.dq(), dp = grid.dp();
  const int si = static_cast<int>(std::lround(q0 / dq));
  const int sj = static_cast<int>(std::lround(p0 / dp));
  if (std::abs(si * dq - q0) > 1e-9 || std::abs(sj * dp - p0) > 1e-9)
    throw DomainError("shift must be a whole number of grid steps");
  const CMat D = displacement_matrix(q0, p0, rho.budget);
  FockDensityMatrix shifted;
  shifted.m = D * rho.m * D.adjoint();
  shifted.budget = rho.budget;
  const PhaseSpaceGrid g1 = covariant_density_grid(shifted, T, grid);
  const PhaseSpaceGrid g2 = covariant_density_grid(rho, T, grid);
  double sup = 0.0;
  for (int i = 1; i + 1 < g1.nq; ++i)
    for (int j = 1; j + 1 < g1.np; ++j) {
      const int i2 = i - si, j2 = j - sj;
      if (i2 < 1 || i2 + 1 >= g2.nq || j2 < 1 || j2 + 1 >= g2.np) continue;
      sup = std::max(sup, std::abs(g1.values(i, j) - g2.values(i2, j2)));
    }
  return sup;
}

// ---------------------------------------------------------------------------
// Limit-statistics samplers
// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> sample_smeared_coherent(
    cxd alpha, const SmearKernel2D& k, int shots, std::uint64_t seed) {
  if (shots < 1) throw DomainError("shots must be >= 1");
  const double q0 = std::sqrt(2.0) * alpha.real();
  const double p0 = std::sqrt(2.0) * alpha.imag();
  const double sx = std::sqrt(1.0 + k.variance_x());
  const double sy = std::sqrt(1.0 + k.variance_y());
  std::uint64_t state = seed;
  std::mt19937_64 rng(splitmix64_next(state));
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<std::pair<double, double>> out(shots);
  for (auto& s : out) {
    s.first = q0 + sx * n01(rng);
    s.second = p0 + sy * n01(rng);
  }
  return out;
}

std::vector<std::pair<double, double>> sample_smeared_fock(
    int n, const SmearKernel2D& k, int shots, std::uint64_t seed) {
  if (n < 0) throw DomainError("photon number must be >= 0");
  if (shots < 1) throw DomainError("shots must be >= 1");
  const double sx = std::sqrt(k.variance_x());
  const double sy = std::sqrt(k.variance_y());
  std::uint64_t state = seed;
  std::mt19937_64 rng(splitmix64_next(state));
  std::normal_distribution<double> n01(0.0, 1.0);
  std::gamma_distribution<double> gamma(n + 1.0, 1.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  std::vector<std::pair<double, double>> out(shots);
  for (auto& s : out) {
    const double r = std::sqrt(2.0 * gamma(rng));
    const double a = ang(rng);
    s.first = r * std::cos(a) + (sx > 0.0 ? sx * n01(rng) : 0.0);
    s.second = r * std::sin(a) + (sy > 0.0 ? sy * n01(rng) : 0.0);
  }
  return out;
}

}  // namespace hdsim
