#include <doctest.h>

#include <cmath>

#include "cpdg/kernels.hpp"

using namespace cpdg;
using namespace cpdg::kernels;
using graph::OffspringDistribution;

TEST_CASE("sigma kernel values") {
  CHECK(KernelSpec::sigma_kernel(1, 1, 1).p(2, 3) == doctest::Approx(1.0 / 6.0));
  CHECK(KernelSpec::sigma_kernel(1, 1, 1).p(3, 2) == doctest::Approx(1.0 / 6.0));
  CHECK(KernelSpec::sigma_kernel(0, 0.7, 1).p(9, 4) == 1.0);
  CHECK(KernelSpec::sigma_kernel(1, 0, 1).p(2, 5) == doctest::Approx(0.2));
  CHECK(KernelSpec::sigma_kernel(0.5, 1, 10).p(2, 2) == 1.0);
}

TEST_CASE("update speed") {
  auto k = KernelSpec::sigma_kernel(1, 1, 1, 0, 1);
  CHECK(k.v(1, 1) == 1.0);
  CHECK(k.v(100, 7) == 1.0);
  CHECK(KernelSpec::sigma_kernel(1, 1, 1, 1, 2).v(3, 5) == doctest::Approx(10.0));
  CHECK(KernelSpec::sigma_kernel(1, 1, 1, -1, 1).v(4, 2) == doctest::Approx(0.25));
}

TEST_CASE("kernel validation") {
  CHECK_THROWS_AS(KernelSpec::sigma_kernel(-1, 0, 1), KernelError);
  CHECK_THROWS_AS(KernelSpec::sigma_kernel(1, 2, 1), KernelError);
  CHECK_THROWS_AS(KernelSpec::sigma_kernel(1, 0, 0), KernelError);
  CHECK_THROWS_AS(KernelSpec::sigma_kernel(1, 0, 1, 0, 0), KernelError);
  CHECK_THROWS_AS(KernelSpec::constant_p(1.5), KernelError);
}

TEST_CASE("custom table overrides selected pairs") {
  auto base = KernelSpec::sigma_kernel(1, 1, 1);
  auto k = KernelSpec::with_table({{{2, 3}, 0.9}}, base);
  CHECK(k.p(2, 3) == 0.9);
  CHECK(k.p(3, 2) == 0.9);
  CHECK(k.p(2, 2) == doctest::Approx(0.25));
}

TEST_CASE("envelope check") {
  auto k = KernelSpec::sigma_kernel(1, 1, 1);
  auto e = envelope_check(k, 2, default_n_range(2, 10000));
  CHECK_FALSE(e.violation);
  CHECK(e.kappa1 == doctest::Approx(0.5));
  CHECK(e.kappa2 == doctest::Approx(0.5));
  auto v = envelope_check(KernelSpec::sigma_kernel(1, 1, 1, 0.5, 3), 4, default_n_range(4, 1000));
  CHECK(v.nu1 == doctest::Approx(3.0));
  CHECK(v.nu2 == doctest::Approx(3.0));
  auto bad = KernelSpec::with_function([](std::uint64_t n, std::uint64_t) { return std::exp(-double(n)); }, "exp");
  bad.alpha = 1;
  auto eb = envelope_check(bad, 1, default_n_range(1, 1000));
  CHECK(eb.violation);
  CHECK_FALSE(eb.message.empty());
}

TEST_CASE("percolated offspring") {
  Rng rng(5);
  PercolatedOffspring all{OffspringDistribution::geometric(0.3), KernelSpec::constant_p(1.0)};
  PercolatedOffspring none{OffspringDistribution::geometric(0.3), KernelSpec::constant_p(0.0)};
  Rng a(11), b(11);
  for (int i = 0; i < 1000; ++i) {
    const auto z = all.base.sample(a);
    const auto zp = sample_zeta_p(all, b);
    // p ≡ 1: ζ^p = ζ; the sampler draws ζ first from the same stream
    CHECK(zp == z);
    for (std::uint64_t j = 0; j < z; ++j) {
      a.uniform();
      all.base.sample(a);
    }
    CHECK(sample_zeta_p(none, rng) == 0);
  }
  // ζ ≡ d, constant p = c: Binomial(d, c)
  PercolatedOffspring bin{OffspringDistribution::deterministic(10), KernelSpec::constant_p(0.3)};
  const int n = 100000;
  double s = 0;
  for (int i = 0; i < n; ++i) s += static_cast<double>(sample_zeta_p(bin, rng));
  const double se = std::sqrt(10 * 0.3 * 0.7 / n);
  CHECK(std::fabs(s / n - 3.0) < 3 * se);
}

TEST_CASE("tail exponent estimator") {
  Rng rng(77);
  const auto pl = OffspringDistribution::power_law(2.5);
  std::vector<std::uint64_t> x(200000);
  for (auto& v : x) v = pl.sample(rng);
  auto t = tail_exponent_estimate(x);
  CHECK(t.reliable);
  CHECK(t.exponent > 2.2);
  CHECK(t.exponent < 2.8);
  std::vector<double> e(200000);
  for (auto& v : e) v = rng.exponential(1.0);
  CHECK_FALSE(tail_exponent_estimate(e).reliable);
  CHECK_FALSE(tail_exponent_estimate(std::vector<double>(50, 1.0)).reliable);
}
