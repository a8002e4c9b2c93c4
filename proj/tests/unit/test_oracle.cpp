#include <doctest.h>

#include <cmath>

#include "cpdg/engine.hpp"
#include "cpdg/oracle.hpp"

using namespace cpdg;
using namespace cpdg::oracle;
using doctest::Approx;

TEST_CASE("state space and generator") {
  auto g = graph::complete_graph(2);
  const auto k = kernels::KernelSpec::sigma_kernel(0.5, 1, 1, 0, 1);
  const auto m = build_exact(g, k, 1.0);
  CHECK(m.states == 8);
  for (std::size_t s = 0; s < m.states; ++s) {
    double out = 0;
    for (std::size_t i = m.row[s]; i < m.row[s + 1]; ++i) out += m.rate[i];
    CHECK(out == Approx(m.exit[s]));
  }
  CHECK(m.index(m.c_mask(5), m.b_mask(5)) == 5);
  CHECK_THROWS_AS(build_exact(graph::complete_graph(6), k, 1.0), OracleError);
}

TEST_CASE("initial distribution is stationary for the background") {
  auto g = graph::star_graph(2);
  const auto k = kernels::KernelSpec::constant_p(0.3);
  const auto m = build_exact(g, k, 1.0);
  const auto pi = initial_distribution(m, 1u);
  double tot = 0, both = 0;
  for (std::size_t s = 0; s < m.states; ++s) {
    tot += pi[s];
    if (m.b_mask(s) == 3u) both += pi[s];
    if (m.c_mask(s) != 1u) CHECK(pi[s] == 0.0);
  }
  CHECK(tot == Approx(1.0));
  CHECK(both == Approx(0.09));
}

TEST_CASE("lambda = 0: survival is e^{-t}") {
  auto g = graph::complete_graph(3);
  const auto m = build_exact(g, kernels::KernelSpec::constant_p(0.5), 0.0);
  const auto pi = initial_distribution(m, 1u);
  for (double t : {0.1, 1.0, 3.0})
    CHECK(transient_prob(m, pi, t, [](std::uint32_t c, std::uint32_t) { return c != 0; }) == Approx(std::exp(-t)));
  const auto pi2 = initial_distribution(m, 3u);
  // two independent Exp(1) recoveries
  CHECK(transient_prob(m, pi2, 1.0, [](std::uint32_t c, std::uint32_t) { return c != 0; }) ==
        Approx(1 - std::pow(1 - std::exp(-1.0), 2)));
  CHECK(extinction_stats(m, pi2).mean_time == Approx(1.5));
}

TEST_CASE("single vertex") {
  auto g = graph::build_finite({});
  const auto m = build_exact(g, kernels::KernelSpec::constant_p(0.5), 2.0);
  CHECK(m.states == 2);
  const auto es = extinction_stats(m, initial_distribution(m, 1u));
  CHECK(es.p_extinct == Approx(1.0));
  CHECK(es.mean_time == Approx(1.0));
}

TEST_CASE("K2 with p = 1: mean extinction time by first-step analysis") {
  // states: one infected (rate λ to two, 1 to none), two infected (rate 2 to one)
  // m1 = 1/(λ+1) + λ/(λ+1) m2 ; m2 = 1/2 + m1
  const double l = 1.7;
  const double m1 = (1.0 / (l + 1) + l / (l + 1) * 0.5) / (1 - l / (l + 1));
  auto g = graph::complete_graph(2);
  const auto m = build_exact(g, kernels::KernelSpec::constant_p(1.0, 0, 3.0), l);
  CHECK(extinction_stats(m, initial_distribution(m, 1u)).mean_time == Approx(m1));
}

TEST_CASE("transient distribution sums to one and the engine agrees on K2") {
  auto g = graph::complete_graph(2);
  const auto k = kernels::KernelSpec::constant_p(0.4, 0.0, 0.8);
  const auto m = build_exact(g, k, 1.5);
  const auto pi = initial_distribution(m, 1u);
  const auto d = transient(m, pi, 0.7);
  double s = 0;
  for (double x : d) s += x;
  CHECK(s == Approx(1.0).epsilon(1e-10));
  const double exact = transient_prob(m, pi, 0.7, [](std::uint32_t c, std::uint32_t) { return c == 3u; });
  const int n = 40000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    engine::Options o;
    o.lambda = 1.5;
    engine::Simulator sim(g, k, o);
    sim.reset(engine::replica_seed(17, i), {engine::LayerSpec{engine::Variant::CPDG, 1.0, {0}}});
    sim.run_until(0.7);
    hits += sim.infected_count(0) == 2;
  }
  CHECK(std::fabs(hits / double(n) - exact) < 4 * std::sqrt(exact * (1 - exact) / n));
}
