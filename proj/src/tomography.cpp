#include "hdsim/tomography.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "hdsim/eightport.hpp"
#include "hdsim/fock.hpp"
#include "hdsim/grid_fft.hpp"
#include "hdsim/math.hpp"
#include "hdsim/parallel.hpp"

namespace hdsim {

namespace {

std::vector<double> dft_angular_frequencies(int n, double step) {
  std::vector<double> w(n);
  for (int k = 0; k < n; ++k) {
    const int signed_k = (k < (n + 1) / 2) ? k : k - n;
    w[k] = 2.0 * M_PI * signed_k / (n * step);
  }
  return w;
}

void check_same_layout(const PhaseSpaceGrid& a, const PhaseSpaceGrid& b) {
  if (a.nq != b.nq || a.np != b.np ||
      std::abs(a.q_min - b.q_min) > 1e-12 ||
      std::abs(a.p_min - b.p_min) > 1e-12 ||
      std::abs(a.dq() - b.dq()) > 1e-12 || std::abs(a.dp() - b.dp()) > 1e-12)
    throw DomainError("grids have different layouts");
}

}  // namespace

// ---------------------------------------------------------------------------
// Continuous-convention Fourier transforms
// ---------------------------------------------------------------------------

FrequencyGrid grid_fourier(const PhaseSpaceGrid& g) {
  FrequencyGrid f;
  f.nq = g.nq;
  f.np = g.np;
  f.dq = g.dq();
  f.dp = g.dp();
  f.freq_q = dft_angular_frequencies(g.nq, f.dq);
  f.freq_p = dft_angular_frequencies(g.np, f.dp);
  f.values.assign(static_cast<size_t>(g.nq) * g.np, cxd(0.0, 0.0));
  for (int i = 0; i < g.nq; ++i)
    for (int j = 0; j < g.np; ++j) f.at(i, j) = cxd(g.values(i, j), 0.0);
  fft2(f.values, g.nq, g.np, false);
  const double scale = f.dq * f.dp / (2.0 * M_PI);
  for (int k = 0; k < g.nq; ++k)
    for (int l = 0; l < g.np; ++l)
      f.at(k, l) *= scale * std::exp(cxd(0.0, -(g.q_min * f.freq_q[k] +
                                               g.p_min * f.freq_p[l])));
  return f;
}

PhaseSpaceGrid grid_fourier_inverse(const FrequencyGrid& f,
                                    const PhaseSpaceGrid& layout) {
  if (f.nq != layout.nq || f.np != layout.np)
    throw DomainError("frequency payload does not match the grid layout");
  PhaseSpaceGrid out = layout;
  out.allocate();
  std::vector<cxd> buf(f.values);
  const double scale = 2.0 * M_PI / (f.dq * f.dp);
  for (int k = 0; k < f.nq; ++k)
    for (int l = 0; l < f.np; ++l)
      buf[static_cast<size_t>(k) * f.np + l] *=
          scale * std::exp(cxd(0.0, +(layout.q_min * f.freq_q[k] +
                                      layout.p_min * f.freq_p[l])));
  fft2(buf, f.nq, f.np, true);
  const double norm = 1.0 / (static_cast<double>(f.nq) * f.np);
  for (int i = 0; i < f.nq; ++i)
    for (int j = 0; j < f.np; ++j)
      out.values(i, j) = buf[static_cast<size_t>(i) * f.np + j].real() * norm;
  return out;
}

double kernel_fourier(const SmearKernel2D& k, double freq_q, double freq_p) {
  const double vx = k.variance_x(), vy = k.variance_y();
  return std::exp(-0.5 * (vx * freq_q * freq_q + vy * freq_p * freq_p)) /
         (2.0 * M_PI);
}

// ---------------------------------------------------------------------------
// Forward smearing
// ---------------------------------------------------------------------------

PhaseSpaceGrid forward_smear(const PhaseSpaceGrid& g, const SmearKernel2D& k) {
  if (k.fully_dirac()) return g;
  if (k.kx.kind == SmearKernel1D::Kind::Gaussian &&
      g.dq() > std::sqrt(k.variance_x()) / 6.0)
    throw ResolutionError("q step too coarse for the kernel width");
  if (k.ky.kind == SmearKernel1D::Kind::Gaussian &&
      g.dp() > std::sqrt(k.variance_y()) / 6.0)
    throw ResolutionError("p step too coarse for the kernel width");

  const int n0 = 2 * g.nq, n1 = 2 * g.np;
  std::vector<cxd> buf(static_cast<size_t>(n0) * n1, cxd(0.0, 0.0));
  for (int i = 0; i < g.nq; ++i)
    for (int j = 0; j < g.np; ++j)
      buf[static_cast<size_t>(i) * n1 + j] = cxd(g.values(i, j), 0.0);
  fft2(buf, n0, n1, false);
  const auto w0 = dft_angular_frequencies(n0, g.dq());
  const auto w1 = dft_angular_frequencies(n1, g.dp());
  for (int a = 0; a < n0; ++a)
    for (int b = 0; b < n1; ++b)
      buf[static_cast<size_t>(a) * n1 + b] *=
          2.0 * M_PI * kernel_fourier(k, w0[a], w1[b]);
  fft2(buf, n0, n1, true);
  const double norm = 1.0 / (static_cast<double>(n0) * n1);
  PhaseSpaceGrid out = g;
  out.allocate();
  for (int i = 0; i < g.nq; ++i)
    for (int j = 0; j < g.np; ++j)
      out.values(i, j) = buf[static_cast<size_t>(i) * n1 + j].real() * norm;
  return out;
}

// ---------------------------------------------------------------------------
// Deconvolution
// ---------------------------------------------------------------------------

PhaseSpaceGrid deconvolve(const PhaseSpaceGrid& h, const SmearKernel2D& k,
                          const DeconvolutionPolicy& policy,
                          DeconvolutionReport* report) {
  policy.validate();
  DeconvolutionReport rep;
  rep.cells_total = h.nq * h.np;
  if (k.fully_dirac()) {
    rep.multiplier_max = 1.0;
    rep.multiplier_min_used = 1.0;
    rep.cells_inverted = rep.cells_total;
    rep.condition_number = 1.0;
    if (report) *report = rep;
    return h;
  }

  std::vector<cxd> buf(static_cast<size_t>(h.nq) * h.np);
  for (int i = 0; i < h.nq; ++i)
    for (int j = 0; j < h.np; ++j)
      buf[static_cast<size_t>(i) * h.np + j] = cxd(h.values(i, j), 0.0);
  fft2(buf, h.nq, h.np, false);

  const auto w0 = dft_angular_frequencies(h.nq, h.dq());
  const auto w1 = dft_angular_frequencies(h.np, h.dp());
  std::vector<double> mult(buf.size());
  double mmax = 0.0;
  for (int a = 0; a < h.nq; ++a)
    for (int b = 0; b < h.np; ++b) {
      const double m = 2.0 * M_PI * kernel_fourier(k, w0[a], w1[b]);
      mult[static_cast<size_t>(a) * h.np + b] = m;
      mmax = std::max(mmax, m);
    }
  rep.multiplier_max = mmax;

  double lambda = 0.0;
  if (policy.mode == DeconvMode::Tikhonov) {
    if (policy.lambda > 0.0) {
      lambda = policy.lambda;
    } else {
      if (!(policy.noise_level > 0.0))
        throw DomainError(
            "Tikhonov auto-regularization needs a positive noise level");
      // Discrepancy principle: pick lambda so the backward-smeared residual
      // matches the stated noise level. Residual grows with lambda.
      const double cell = h.dq() * h.dp() / rep.cells_total;
      const auto residual = [&](double lam) {
        double acc = 0.0;
        for (size_t i = 0; i < buf.size(); ++i) {
          const double m = mult[i];
          const double r = std::norm(buf[i]) *
                           std::pow(lam * lam / (m * m + lam * lam), 2);
          acc += r;
        }
        return std::sqrt(acc * cell);
      };
      double lo = 1e-10, hi = 1e2;
      if (residual(lo) >= policy.noise_level) {
        lambda = lo;
      } else if (residual(hi) <= policy.noise_level) {
        lambda = hi;
      } else {
        for (int it = 0; it < 80; ++it) {
          const double mid = std::sqrt(lo * hi);
          (residual(mid) < policy.noise_level ? lo : hi) = mid;
        }
        lambda = std::sqrt(lo * hi);
      }
    }
    rep.lambda_used = lambda;
  }

  double min_used = mmax;
  int inverted = 0;
  const double floor =
      policy.mode == DeconvMode::ExactDivision
          ? 1e-4 * mmax
          : (policy.mode == DeconvMode::Thresholded ? policy.threshold * mmax
                                                    : 0.0);
  for (size_t i = 0; i < buf.size(); ++i) {
    const double m = mult[i];
    if (policy.mode == DeconvMode::Tikhonov) {
      buf[i] *= m / (m * m + lambda * lambda);
      ++inverted;
      min_used = std::min(min_used, m);
    } else if (m >= floor) {
      buf[i] /= m;
      ++inverted;
      min_used = std::min(min_used, m);
    } else {
      buf[i] = cxd(0.0, 0.0);
    }
  }
  rep.cells_inverted = inverted;
  rep.multiplier_min_used = inverted > 0 ? min_used : 0.0;
  rep.condition_number = inverted > 0 ? mmax / min_used : 0.0;
  rep.noise_amplification_warning = rep.condition_number > 1e6;

  fft2(buf, h.nq, h.np, true);
  const double norm = 1.0 / rep.cells_total;
  PhaseSpaceGrid out = h;
  out.allocate();
  for (int i = 0; i < h.nq; ++i)
    for (int j = 0; j < h.np; ++j)
      out.values(i, j) = buf[static_cast<size_t>(i) * h.np + j].real() * norm;
  if (report) *report = rep;
  return out;
}

// ---------------------------------------------------------------------------
// State reconstruction
// ---------------------------------------------------------------------------

cxd weyl_transform_of_state(const FockDensityMatrix& rho, double q, double p) {
  const CMat W = displacement_matrix(p, -q, rho.budget);
  return (rho.m.transpose().cwiseProduct(W)).sum();
}

ReconstructionReport reconstruct_state(const PhaseSpaceGrid& g,
                                       const FockDensityMatrix& T,
                                       const TruncationBudget& budget,
                                       double divisor_threshold) {
  budget.validate();
  if (T.dim() != budget.dim())
    throw DomainError("generating operator does not match the budget");
  if (!(divisor_threshold > 0.0))
    throw DomainError("divisor threshold must be positive");

  const FrequencyGrid F = grid_fourier(g);

  // Significant entries of T: the divisor only needs exact translation-matrix
  // entries on T's support.
  struct Entry {
    int m, n;
    cxd v;
  };
  std::vector<Entry> sig;
  for (int m = 0; m < T.dim(); ++m)
    for (int n = 0; n < T.dim(); ++n)
      if (std::abs(T.m(m, n)) > 1e-16) sig.push_back({m, n, T.m(m, n)});

  const int cells = F.nq * F.np;
  std::vector<cxd> divisor(cells);
  parallel_for(cells, [&](int idx) {
    const int kq = idx / F.np, lp = idx % F.np;
    // Frequency (wx, wy) corresponds to the translation labelled
    // (q, p) = (wy, -wx).
    const double q = F.freq_p[lp];
    const double p = -F.freq_q[kq];
    cxd acc(0.0, 0.0);
    for (const auto& e : sig)
      acc += e.v * std::conj(weyl_entry(e.m, e.n, q, p));
    divisor[idx] = acc;
  });

  std::vector<int> used;
  used.reserve(cells);
  double dmin = 0.0;
  for (int idx = 0; idx < cells; ++idx) {
    const double a = std::abs(divisor[idx]);
    if (a >= divisor_threshold) {
      if (used.empty() || a < dmin) dmin = a;
      used.push_back(idx);
    }
  }
  if (used.empty())
    throw DivisorThresholdError(
        "no frequency cell clears the divisor threshold");

  const int d = budget.dim();
  const double dw = (2.0 * M_PI / (F.np * F.dp)) *
                    (2.0 * M_PI / (F.nq * F.dq));
  CMat raw = CMat::Zero(d, d);
  const int chunk = 64;
  std::vector<CMat> partial(
      std::min<size_t>(chunk, used.size()));
  for (size_t base = 0; base < used.size(); base += chunk) {
    const int count =
        static_cast<int>(std::min<size_t>(chunk, used.size() - base));
    parallel_for(count, [&](int i) {
      const int idx = used[base + i];
      const int kq = idx / F.np, lp = idx % F.np;
      const double q = F.freq_p[lp];
      const double p = -F.freq_q[kq];
      const cxd chi = 2.0 * M_PI * F.values[idx] / divisor[idx];
      // Adjoint of the translation at (q,p) equals the translation at
      // (-q,-p), built exactly entry by entry.
      partial[i] = chi * displacement_matrix(-q, -p, budget);
    });
    for (int i = 0; i < count; ++i) raw += partial[i];
  }
  raw *= dw / (2.0 * M_PI);

  const CMat herm = 0.5 * (raw + raw.adjoint().eval());
  ReconstructionReport rep;
  rep.cells_used = static_cast<int>(used.size());
  rep.divisor_min_used = dmin;
  rep.trace_before_projection = herm.trace().real();

  Eigen::SelfAdjointEigenSolver<CMat> es(herm);
  RVec ev = es.eigenvalues().cwiseMax(0.0);
  const double tr = ev.sum();
  if (!(tr > 1e-12))
    throw ValidationError("reconstructed operator has no positive mass");
  ev /= tr;
  CMat projected =
      es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  rep.projection_residual = (projected - herm).norm();
  rep.rho.m = std::move(projected);
  rep.rho.budget = budget;
  return rep;
}

// ---------------------------------------------------------------------------
// Grid metrics and histograms
// ---------------------------------------------------------------------------

double grid_l1_distance(const PhaseSpaceGrid& a, const PhaseSpaceGrid& b) {
  check_same_layout(a, b);
  return (a.values - b.values).cwiseAbs().sum() * a.dq() * a.dp();
}

double grid_rel_l2(const PhaseSpaceGrid& a, const PhaseSpaceGrid& b) {
  check_same_layout(a, b);
  const double nb = b.values.norm();
  if (nb == 0.0) throw DomainError("reference grid is identically zero");
  return (a.values - b.values).norm() / nb;
}

PhaseSpaceGrid histogram_density(
    const std::vector<std::pair<double, double>>& xs, PhaseSpaceGrid layout) {
  if (xs.empty()) throw DomainError("no samples to bin");
  layout.allocate();
  const double dq = layout.dq(), dp = layout.dp();
  for (const auto& s : xs) {
    const int i = static_cast<int>(std::floor((s.first - layout.q_min) / dq));
    const int j = static_cast<int>(std::floor((s.second - layout.p_min) / dp));
    if (i >= 0 && i < layout.nq && j >= 0 && j < layout.np)
      layout.values(i, j) += 1.0;
  }
  layout.values /= static_cast<double>(xs.size()) * dq * dp;
  return layout;
}

}  // namespace hdsim
