#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cpdg/graph.hpp"

using namespace cpdg;
using namespace cpdg::graph;

TEST_CASE("build_finite degrees") {
  CHECK(build_finite({{0, 1}}).degree(0) == 1);
  auto s = build_finite({{0, 1}, {0, 2}, {0, 3}});
  CHECK(s.num_vertices() == 4);
  CHECK(s.degree(0) == 3);
  for (VertexId v = 1; v < 4; ++v) CHECK(s.degree(v) == 1);
  auto p = build_finite({{0, 1}, {1, 2}});
  CHECK(p.degree(0) == 1);
  CHECK(p.degree(1) == 2);
  CHECK(p.degree(2) == 1);
}

TEST_CASE("build_finite rejects malformed input") {
  CHECK_THROWS_AS(build_finite({{0, 1}, {1, 0}}), GraphError);
  CHECK_THROWS_AS(build_finite({{0, 0}}), GraphError);
  CHECK_THROWS_AS(build_finite({{0, 1}, {2, 3}}), GraphError);
}

TEST_CASE("graph file round trip") {
  std::istringstream in("#vertices 4\n0 1\n1 2\n\n# comment\n1 3\n");
  auto g = read_graph(in);
  CHECK(g.num_vertices() == 4);
  CHECK(g.num_edges() == 3);
  CHECK(g.degree(1) == 3);
  std::ostringstream out;
  g.write(out);
  CHECK(out.str() == "#vertices 4\n0 1\n1 2\n1 3\n");
  std::istringstream bad("0 1\n");
  CHECK_THROWS_AS(read_graph(bad), GraphError);
  std::istringstream range("#vertices 2\n0 2\n");
  CHECK_THROWS_AS(read_graph(range), GraphError);
  std::istringstream isolated("#vertices 3\n0 1\n");
  CHECK_THROWS_AS(read_graph(isolated), GraphError);
}

TEST_CASE("named graphs") {
  CHECK(complete_graph(4).num_edges() == 6);
  CHECK(star_graph(5).degree(0) == 5);
  CHECK(path_graph(5).num_edges() == 4);
  auto t = regular_tree(3, 2);
  CHECK(t.num_vertices() == 1 + 3 + 6);
  CHECK(t.degree(0) == 3);
  CHECK(t.degree(1) == 3);
  auto pl = path_with_leaves({3, 3, 3});
  CHECK(pl.degree(0) == 3);
  CHECK(pl.degree(1) == 3);
  CHECK(pl.degree(2) == 3);
}

TEST_CASE("offspring pmf sums to one and means agree") {
  for (const auto& d : {OffspringDistribution::geometric(0.3), OffspringDistribution::power_law(2.5),
                        OffspringDistribution::stretched_exponential(0.5, 2.0),
                        OffspringDistribution::tabulated({0.2, 0.3, 0.5})}) {
    double s = 0, m = 0;
    for (std::uint64_t k = 0; k < 200000; ++k) {
      s += d.pmf(k);
      m += static_cast<double>(k) * d.pmf(k);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(d.cdf(3) == doctest::Approx(d.pmf(0) + d.pmf(1) + d.pmf(2) + d.pmf(3)));
    if (d.kind() != OffspringDistribution::Kind::PowerLaw) CHECK(d.mean() == doctest::Approx(m).epsilon(1e-6));
  }
  auto g = OffspringDistribution::geometric(0.25);
  CHECK(g.pmf(3) == doctest::Approx(0.25 * std::pow(0.75, 3)));
  CHECK(g.mean() == doctest::Approx(3.0));
}

TEST_CASE("BGW trees: deterministic offspring") {
  auto t = grow_bgw(OffspringDistribution::deterministic(2), 7, Caps{});
  t.materialize_all(4);
  CHECK(t.degree(0) == 2);
  for (VertexId v = 1; v < t.num_vertices(); ++v)
    if (t.materialized(v)) CHECK(t.degree(v) == 3);
  auto single = grow_bgw(OffspringDistribution::deterministic(0), 7, Caps{});
  CHECK(single.num_vertices() == 1);
}

TEST_CASE("BGW trees: power-law root mean within 3 SE of the pmf sum") {
  const auto d = OffspringDistribution::power_law(2.5);
  double exact = 0;
  for (std::uint64_t k = 1; k < 2000000; ++k) exact += static_cast<double>(k) * d.pmf(k);
  // tail beyond the sum: Σ_{k>K} k^{-1.5} / ζ(2.5) ≈ 2 K^{-1/2}/ζ(2.5)
  exact += 2.0 / std::sqrt(2e6) / 1.341487257250917;
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = grow_bgw(d, static_cast<std::uint64_t>(i), Caps{}).degree(0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::fabs(mean - exact) < 3.0 * se);
}

TEST_CASE("BGW trees are reproducible and respect caps") {
  const auto d = OffspringDistribution::geometric(0.3);
  auto a = grow_bgw(d, 99, Caps{});
  auto b = grow_bgw(d, 99, Caps{});
  a.materialize_all(5);
  b.materialize_all(5);
  std::ostringstream sa, sb;
  a.write(sa);
  b.write(sb);
  CHECK(sa.str() == sb.str());
  auto c = grow_bgw(OffspringDistribution::deterministic(3), 1, Caps{10, 100});
  c.materialize_all(5);
  CHECK(c.truncated());
  CHECK(c.num_vertices() <= 10);
}

TEST_CASE("conditioned root degree and bounded children") {
  auto base = grow_bgw(OffspringDistribution::deterministic(2), 3, Caps{});
  auto g = conditioned_root_degree(base, 5);
  CHECK(g.degree(0) == 5);
  for (VertexId c : g.children(0)) CHECK(g.degree(c) == 3);
  CHECK(conditioned_root_degree(base, 1).degree(0) == 1);
  CHECK_THROWS_AS(conditioned_root_degree(grow_bgw(OffspringDistribution::power_law(2.5), 1, Caps{}), 0), GraphError);
  for (std::uint64_t s = 0; s < 5; ++s)
    CHECK(conditioned_root_degree(grow_bgw(OffspringDistribution::power_law(2.5), s, Caps{}), 100).degree(0) == 100);
  CHECK(bounded_degree_children(g, 0, 10).size() == 5);
  CHECK(bounded_degree_children(g, 0, 0).empty());
  auto star = induced_star(g, 0, 10);
  CHECK(star.num_vertices() == 6);
  CHECK(star.degree(0) == 5);
  CHECK(star.degree(1) == 3);
}
