#include <doctest.h>

#include <string>

#include "cpdg/config.hpp"

using namespace cpdg;
using namespace cpdg::config;

TEST_CASE("defaults and canonical round trip") {
  const auto c = parse_config("{}");
  CHECK(c.seed == 1);
  CHECK(c.lambda == std::vector<double>{1.0});
  const auto again = parse_config(c.canonical);
  CHECK(again.canonical == c.canonical);
  CHECK(again.hash == c.hash);
  CHECK(c.hash == fnv1a(c.canonical));
  CHECK(c.hash_hex().size() == 16);
}

TEST_CASE("key order and formatting do not change the hash") {
  const auto a = parse_config(R"({"seed": 3, "kernel": {"alpha": 0.4, "sigma": 0.5}})");
  const auto b = parse_config(R"({"kernel": {"sigma": 0.5, "alpha": 0.4},
                                  "seed": 3})");
  CHECK(a.hash == b.hash);
  const auto d = parse_config(R"({"seed": 4, "kernel": {"alpha": 0.4, "sigma": 0.5}})");
  CHECK(a.hash != d.hash);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("lambda forms") {
  CHECK(parse_config(R"({"lambda": 0.5})").lambda == std::vector<double>{0.5});
  CHECK(parse_config(R"({"lambda": [0.5, 1]})").lambda.size() == 2);
  const auto g = parse_config(R"({"lambda": {"from": 0, "to": 1, "count": 5}})").lambda;
  REQUIRE(g.size() == 5);
  CHECK(g[0] == 0.0);
  CHECK(g[2] == doctest::Approx(0.5));
  CHECK(g[4] == doctest::Approx(1.0));
}

TEST_CASE("violations are reported with field paths") {
  try {
    parse_config(R"({"kernel": {"alpha": -1, "sigma": 2}, "bogus": 1})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string all;
    for (const auto& v : e.violations) all += v + "\n";
    CHECK(all.find("kernel.alpha") != std::string::npos);
    CHECK(all.find("kernel.sigma") != std::string::npos);
    CHECK(all.find("bogus") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"graph": {"type": "file"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"replicas": "many"})"), ConfigError);
}

TEST_CASE("graphs from configs") {
  auto c = parse_config(R"({"graph": {"type": "star_graph", "n": 5}})");
  auto g = build_graph(c.graph);
  CHECK(g.num_vertices() == 6);
  CHECK(g.degree(0) == 5);
  auto f = parse_config(std::string(R"({"graph": {"type": "file", "path": ")") + CPDG_TEST_DATA + "/triangle.graph\"}}");
  CHECK(build_graph(f.graph).num_edges() == 3);
  auto s = parse_config(
      R"({"graph": {"type": "star", "N": 40, "L": 6, "offspring": {"kind": "deterministic", "d": 2}}})");
  auto st = build_graph(s.graph);
  CHECK(st.num_vertices() == 41);
  CHECK(st.degree(1) == 3);
}

TEST_CASE("kernel table file") {
  auto c = parse_config(std::string(R"({"kernel": {"alpha": 1, "sigma": 1, "table": ")") + CPDG_TEST_DATA +
                        "/kernel.table\"}}");
  const auto k = c.kernel.build();
  CHECK(k.p(2, 3) == 0.75);
  CHECK(k.p(2, 2) == doctest::Approx(0.25));
}
