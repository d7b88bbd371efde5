#include "hdsim/complex_erf.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <vector>

namespace hdsim {

namespace {

constexpr int kN = 36;  // expansion length of the rational approximation

// Weideman-style rational approximation of the Faddeeva function: expansion
// coefficients obtained once from a small FFT-free DFT of the boundary map.
struct WeidemanTable {
  double L;
  std::array<double, kN + 1> a;  // a[1..kN] used
};

const WeidemanTable& weideman_table() {
  static WeidemanTable table = [] {
    WeidemanTable t{};
    const int N = kN;
    const int M = 2 * N;
    const int M2 = 2 * M;
    t.L = std::sqrt(N / std::sqrt(2.0));
    // Sample f(theta) = L^2 + ... on the half grid and take a real DFT.
    std::vector<double> f(M2, 0.0);
    std::vector<double> theta(M2);
    for (int k = 0; k < M2; ++k) {
      theta[k] = M_PI * (k - M + 0.5) / M;  // midpoints in (-pi, pi)
      const double tt = t.L * std::tan(0.5 * theta[k]);
      f[k] = std::exp(-tt * tt) * (t.L * t.L + tt * tt);
    }
    // a_n = (1/M2) sum_k f(theta_k) e^{-i n theta_k}; real by symmetry.
    for (int n = 1; n <= N; ++n) {
      double acc = 0.0;
      for (int k = 0; k < M2; ++k) acc += f[k] * std::cos(n * theta[k]);
      t.a[n] = acc / M2;
    }
    return t;
  }();
  return table;
}

// Core evaluation, valid for Im z >= 0.
std::complex<double> faddeeva_upper(std::complex<double> z) {
  const WeidemanTable& t = weideman_table();
  const std::complex<double> iz(-z.imag(), z.real());  // i z
  const std::complex<double> Zf = (t.L + iz) / (t.L - iz);
  // Polynomial sum_{n=1..N} a_n Z^{n-1} by Horner in Z.
  std::complex<double> p(0.0, 0.0);
  for (int n = kN; n >= 1; --n) p = p * Zf + t.a[n];
  const std::complex<double> denom = t.L - iz;
  std::complex<double> w = 2.0 * p / (denom * denom) +
                           (1.0 / std::sqrt(M_PI)) / denom;
  return w;
}

}  // namespace

std::complex<double> faddeeva_w(std::complex<double> z) {
  if (z.imag() >= 0.0) return faddeeva_upper(z);
  // w(z) = 2 e^{-z^2} - w(-z) extends to the lower half plane.
  const std::complex<double> zz = z * z;
  return 2.0 * std::exp(-zz) - faddeeva_upper(-z);
}

std::complex<double> erfc_complex(std::complex<double> z) {
  if (z.real() >= 0.0) {
    // erfc(z) = e^{-z^2} w(iz) for Re z >= 0.
    const std::complex<double> iz(-z.imag(), z.real());
    return std::exp(-z * z) * faddeeva_upper(iz);  // Im(iz) = Re z >= 0
  }
  return 2.0 - erfc_complex(-z);
}

std::complex<double> erf_complex(std::complex<double> z) {
  return 1.0 - erfc_complex(z);
}

}  // namespace hdsim
