#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "hdsim/detector.hpp"
#include "hdsim/fock.hpp"
#include "hdsim/math.hpp"

using namespace hdsim;

TEST_CASE("binomial count smearing diagonal") {
  const TruncationBudget b{10, 1e-10};
  const RVec d = povm_element_diagonal(Efficiency{0.5}, 1, b);
  // entry_m = C(m,1) 0.5^m
  CHECK(d(0) == 0.0);
  CHECK(d(1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d(2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d(3) == doctest::Approx(0.375).epsilon(1e-14));

  // unit efficiency reduces to the projector
  const RVec e = povm_element_diagonal(Efficiency{1.0}, 2, b);
  for (int m = 0; m <= 10; ++m)
    CHECK(e(m) == doctest::Approx(m == 2 ? 1.0 : 0.0));
}

TEST_CASE("count elements resolve the identity on the truncated space") {
  const TruncationBudget b{64, 1e-10};
  for (double eps : {0.1, 0.5, 1.0}) {
    CAPTURE(eps);
    CHECK(povm_completeness_defect(Efficiency{eps}, b) < 1e-12);
  }
}

TEST_CASE("coherent count kernel diagonal is the thinned Poisson weight") {
  const cxd alpha(0.9, -0.5);
  const double eps = 0.7;
  const double mu = eps * std::norm(alpha);
  for (int n : {0, 1, 4}) {
    const cxd k = coherent_count_kernel(Efficiency{eps}, n, alpha, alpha);
    const double want = std::exp(n * std::log(mu) - mu - log_factorial(n));
    CHECK(k.real() == doctest::Approx(want).epsilon(1e-13));
    CHECK(std::abs(k.imag()) < 1e-16);
  }
}

TEST_CASE("single photon at eps=0.6 clicks with probability 0.6") {
  const TruncationBudget b{6, 1e-10};
  const auto rho = fock_density(1, b);
  const auto dist = count_distribution(rho, Efficiency{0.6}, 3);
  CHECK(dist.probs[0] == doctest::Approx(0.4).epsilon(1e-13));
  CHECK(dist.probs[1] == doctest::Approx(0.6).epsilon(1e-13));
  CHECK(dist.probs[2] == doctest::Approx(0.0));
}

TEST_CASE("coherent input gives a thinned Poisson, both code paths agree") {
  const cxd alpha(1.3, 0.0);
  const double eps = 0.75;
  const double mu = eps * std::norm(alpha);
  const auto sup = CoherentSuperposition::single(alpha);
  const int max_n = 30;
  const auto d1 = count_distribution(sup, Efficiency{eps}, max_n);
  for (int n = 0; n <= 10; ++n) {
    const double want = std::exp(n * std::log(mu) - mu - log_factorial(n));
    CHECK(d1.probs[n] == doctest::Approx(want).epsilon(1e-12));
  }
  const auto rho = coherent_density(alpha, TruncationBudget{40, 1e-12});
  const auto d2 = count_distribution(rho, Efficiency{eps}, max_n);
  for (int n = 0; n <= max_n; ++n)
    CHECK(std::abs(d1.probs[n] - d2.probs[n]) < 1e-12);
  CHECK(d1.total() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("interference survives inefficiency in superposition counting") {
  // For a two-lobe superposition the count law is not the mixture of the
  // two thinned Poissons: the cross terms contribute.
  const auto cat = cat_superposition(cxd(1.2, 0.0), cxd(-1.2, 0.0), 1.0, 1.0);
  const double eps = 0.8;
  const auto dist = count_distribution(cat, Efficiency{eps}, 25);
  CHECK(dist.total() == doctest::Approx(1.0).epsilon(1e-9));
  const double mu = eps * 1.44;
  double mixture0 = std::exp(-mu);  // mixture value at n = 0
  CHECK(std::abs(dist.probs[0] - mixture0) > 1e-3);  // interference visible
  for (double p : dist.probs) CHECK(p >= -1e-12);
}

TEST_CASE("required_max_count covers the analytic tail") {
  const auto sup = CoherentSuperposition::single(cxd(2.0, 1.0));
  const double tol = 1e-9;
  const int n = required_max_count(sup, Efficiency{0.85}, tol);
  const auto dist = count_distribution(sup, Efficiency{0.85}, n);
  CHECK(dist.total() >= 1.0 - tol * 1.01);
  CHECK_THROWS_AS(
      required_max_count(CoherentSuperposition::single(cxd(400.0, 0.0)),
                         Efficiency{0.9}, 1e-9),
      TruncationInsufficient);
}

TEST_CASE("count samplers are reproducible and statistically sound") {
  std::vector<DetectorChannel> ch = {{2.25, Efficiency{0.8}},
                                     {0.49, Efficiency{1.0}}};
  const auto a = sample_counts(ch, 2000, 42);
  const auto b = sample_counts(ch, 2000, 42);
  CHECK(a == b);
  const auto c = sample_counts(ch, 2000, 43);
  CHECK(a != c);
  double mean0 = 0.0, mean1 = 0.0;
  for (const auto& row : a) {
    mean0 += row[0];
    mean1 += row[1];
  }
  mean0 /= a.size();
  mean1 /= a.size();
  // Poisson(1.8) and Poisson(0.49); 5 sigma windows
  CHECK(std::abs(mean0 - 1.8) < 5.0 * std::sqrt(1.8 / 2000.0));
  CHECK(std::abs(mean1 - 0.49) < 5.0 * std::sqrt(0.49 / 2000.0));
}

TEST_CASE("inverse-CDF sampling matches its analytic distribution") {
  const auto sup = CoherentSuperposition::single(cxd(1.3, 0.0));
  const auto dist = count_distribution(sup, Efficiency{0.75}, 30);
  const auto s1 = sample_from_distribution(dist, 100000, 7);
  const auto s2 = sample_from_distribution(dist, 100000, 7);
  CHECK(s1 == s2);
  CHECK(tv_distance(s1, dist) < 0.02);
}

TEST_CASE("tv_distance basics") {
  CountDistribution d;
  d.probs = {1.0};
  std::vector<int> samples(100, 0);
  CHECK(tv_distance(samples, d) == doctest::Approx(0.0).epsilon(1e-15));
  CountDistribution e;
  e.probs = {0.5, 0.5};
  CHECK(tv_distance(samples, e) == doctest::Approx(0.5).epsilon(1e-15));
}
