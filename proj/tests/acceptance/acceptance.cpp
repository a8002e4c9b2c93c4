// Acceptance run: one PASS/FAIL line per criterion.
#include <CLI11.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cpdg/cli.hpp"
#include "cpdg/closedform.hpp"
#include "cpdg/config.hpp"
#include "cpdg/engine.hpp"
#include "cpdg/experiments.hpp"
#include "cpdg/kernels.hpp"
#include "cpdg/lyapunov.hpp"
#include "cpdg/oracle.hpp"
#include "cpdg/parallel.hpp"
#include "cpdg/stats.hpp"

using namespace cpdg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", x);
  return b;
}

unsigned g_threads = 1;
fs::path g_out;

// ---------------------------------------------------------------- 1
Outcome edge_law() {
  Rng rng(0xc1);
  bool ok = true;
  std::ostringstream d;
  double worst_z = 0, worst_tail_z = 0;
  for (int i = 0; i < 10; ++i) {
    const double l = 0.2 + 2.8 * rng.uniform(), v = 0.2 + 2.8 * rng.uniform(), p = 0.05 + 0.95 * rng.uniform();
    const auto mc = experiments::edge_law_mc(l, v, p, 1000000, hash_combine(0xc1, i), {0.5, 1.0, 2.0}, g_threads);
    const double exact = closedform::transmission_prob(l, v, p);
    const double z = (static_cast<double>(mc.successes) / mc.n - exact) / stats::prop_se(exact, mc.n);
    worst_z = std::max(worst_z, std::fabs(z));
    if (std::fabs(z) > 3) ok = false, d << " prob(" << fmt(l) << "," << fmt(v) << "," << fmt(p) << ") z=" << fmt(z);
    const auto law = closedform::make_edge_law(l, v, p);
    for (std::size_t j = 0; j < mc.tail_times.size(); ++j) {
      const double q = closedform::transmission_time_tail(law, mc.tail_times[j]);
      const double tz = (static_cast<double>(mc.tail_counts[j]) / mc.successes - q) / stats::prop_se(q, mc.successes);
      worst_tail_z = std::max(worst_tail_z, std::fabs(tz));
      if (std::fabs(tz) > 3) ok = false, d << " tail(t=" << fmt(mc.tail_times[j]) << ") z=" << fmt(tz);
    }
  }
  return {ok, "max|z| prob=" + fmt(worst_z) + " tail=" + fmt(worst_tail_z) + d.str()};
}

// ---------------------------------------------------------------- 2
Outcome laplace() {
  const double triples[5][3] = {{2, 3, 0.4}, {1, 1, 1}, {0.5, 4, 0.2}, {3, 0.7, 0.9}, {1.5, 1.5, 0.05}};
  bool ok = true;
  double worst = 0;
  for (int i = 0; i < 5; ++i) {
    const auto r = experiments::laplace_mc(triples[i][0], triples[i][1], triples[i][2], 1.0, 1000000, 0x1a + i);
    const double z = (r.mean - r.exact) / r.se;
    worst = std::max(worst, std::fabs(z));
    ok = ok && std::fabs(z) <= 3;
  }
  return {ok, "max|z|=" + fmt(worst)};
}

// ---------------------------------------------------------------- 3
struct OracleCheck {
  double tv = 0, mean = 0, se = 0, exact_mean = 0;
};
OracleCheck oracle_check(graph::GraphView g, std::uint64_t seed) {
  const auto k = kernels::KernelSpec::sigma_kernel(0.5, 1, 1, 0, 1);
  const auto m = oracle::build_exact(g, k, 1.0);
  const auto pi0 = oracle::initial_distribution(m, 1u);
  const auto exact = oracle::transient(m, pi0, 1.0);
  const std::uint64_t n = 1000000;
  std::vector<std::uint32_t> state(n);
  std::vector<double> ext(n);
  const unsigned T = g_threads;
  std::vector<graph::GraphView> gs(T, g);
  parallel_for(n, T, [&](unsigned w, std::size_t i) {
    engine::Options o;
    o.lambda = 1.0;
    engine::Simulator sim(gs[w], k, o);
    sim.reset(engine::replica_seed(seed, i), {engine::LayerSpec{engine::Variant::CPDG, 1.0, {0}}});
    sim.run_until(1.0);
    std::uint32_t c = 0, b = 0;
    for (auto v : sim.infected_set(0)) c |= 1u << v;
    const auto bg = sim.resolve_background(1.0);
    for (std::size_t e = 0; e < bg.size(); ++e) b |= static_cast<std::uint32_t>(bg[e] != 0) << e;
    state[i] = static_cast<std::uint32_t>(m.index(c, b));
    ext[i] = engine::run_replica(gs[w], k, 1.0, engine::Variant::CPDG, {0}, {}, engine::replica_seed(seed ^ 0xe7, i))
                 .time;
  });
  std::vector<double> emp(m.states, 0.0);
  for (auto s : state) emp[s] += 1.0 / static_cast<double>(n);
  OracleCheck r;
  for (std::size_t s = 0; s < m.states; ++s) r.tv += 0.5 * std::fabs(emp[s] - exact[s]);
  const auto ms = stats::mean_se(ext);
  r.mean = ms.mean;
  r.se = ms.se;
  r.exact_mean = oracle::extinction_stats(m, pi0).mean_time;
  return r;
}

Outcome oracle_equivalence() {
  bool ok = true;
  std::ostringstream d;
  const std::pair<const char*, graph::GraphView> cases[] = {{"K2", graph::complete_graph(2)},
                                                            {"star3", graph::star_graph(3)}};
  std::uint64_t seed = 0x03;
  for (const auto& [name, g] : cases) {
    const auto r = oracle_check(g, seed++);
    const double z = (r.mean - r.exact_mean) / r.se;
    ok = ok && r.tv < 5e-3 && std::fabs(z) <= 3;
    d << name << ": tv=" << fmt(r.tv) << " mean=" << fmt(r.mean) << " exact=" << fmt(r.exact_mean)
      << " z=" << fmt(z) << " ";
  }
  return {ok, d.str()};
}

// ---------------------------------------------------------------- 4
Outcome couplings() {
  const auto k = kernels::KernelSpec::sigma_kernel(0.5, 1, 1, 0.3, 1.5);
  Rng rng(0x04);
  std::uint64_t mono = 0, dom = 0, runs = 0;
  engine::RunCaps caps;
  caps.horizon = 20;
  for (int gi = 0; gi < 10; ++gi) {
    const auto n = static_cast<std::uint32_t>(2 + rng() % 5);
    auto g = graph::random_connected(n, 0.35, rng);
    const double lam = 0.5 + 2.5 * rng.uniform();
    std::vector<graph::VertexId> all(n);
    for (std::uint32_t v = 0; v < n; ++v) all[v] = v;
    for (std::uint64_t s = 0; s < 1000; ++s) {
      const auto seed = hash_combine(0x04, gi, s);
      const graph::VertexId x = static_cast<graph::VertexId>(s % n);
      mono += engine::run_coupled(g, k, lam, {x}, all, caps, seed).violation;
      dom += engine::run_waitandsee_dominating(g, k, lam, {x}, caps, seed).violation;
      ++runs;
    }
  }
  return {mono == 0 && dom == 0, "runs=" + std::to_string(runs) + " monotonicity_violations=" + std::to_string(mono) +
                                     " domination_violations=" + std::to_string(dom)};
}

// ---------------------------------------------------------------- 5
Outcome supermartingale() {
  auto g = graph::star_graph(5);
  const auto k = kernels::KernelSpec::sigma_kernel(1.2, 1, 1);
  const auto W = lyapunov::WeightFunction::linear();
  const auto rep = lyapunov::check_conditions(g, k, W);
  const double lam = rep.lambda_star / 2;
  const auto tr = lyapunov::supermartingale_trace(g, k, lam, W, {0}, {0.5, 1, 2, 4}, 10000, 0x05, g_threads);
  std::ostringstream d;
  d << "lambda=" << fmt(lam) << " theta=" << fmt(tr.report.theta);
  for (const auto& p : tr.points) d << " t=" << fmt(p.t) << ":" << fmt(p.mean_f) << "<=" << fmt(p.bound);
  d << " f<|C|=" << tr.f_below_count_violations;
  return {tr.asserted && tr.pass && tr.f_below_count_violations == 0, d.str()};
}

// ---------------------------------------------------------------- 6
Outcome rate_bounds() {
  using mp = boost::multiprecision::cpp_bin_float_50;
  Rng rng(0x06);
  std::uint64_t bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const double l = std::exp(-4 + 8 * rng.uniform()), v = std::exp(-4 + 8 * rng.uniform()), p = rng.uniform();
    const mp L(l), V(v), P(p);
    const mp s = L + V;
    const mp a = (s - boost::multiprecision::sqrt(s * s - 4 * L * V * P)) / 2;
    const mp lo = L * V * P / s, hi = 2 * L * V * P / s;
    if (a < lo || a > hi) ++bad;
    // the double evaluation agrees with the high-precision one
    const mp ad(closedform::lower_bound_rate(l, v, p));
    if (boost::multiprecision::abs(ad - a) > mp(1e-13) * hi) ++bad;
  }
  const double l = 1.0, p = 0.3;
  double prev = 0;
  bool mono = true;
  for (double nu : {1.0, 10.0, 100.0, 1000.0, 10000.0}) {
    const auto k = kernels::KernelSpec::constant_p(p, 0.0, nu);
    const double a = closedform::lower_bound_rate(l, k.v(3, 3), k.p(3, 3));
    mono = mono && a > prev && a <= l * p;
    prev = a;
  }
  const bool limit = std::fabs(prev - l * p) < 1e-3 * l * p;
  return {bad == 0 && mono && limit, "bound_failures=" + std::to_string(bad) + " a(1e4)=" + fmt(prev) +
                                         " lambda*p=" + fmt(l * p) + (mono ? " monotone" : " not monotone")};
}

// ---------------------------------------------------------------- 7
Outcome stable_star() {
  const auto dist = graph::OffspringDistribution::geometric(0.2);
  const auto k = kernels::KernelSpec::sigma_kernel(0.3, 0, 1, 0, 1);
  bool ok = true;
  std::ostringstream d;
  d << "mu_L=" << fmt(dist.mean_truncated(6));
  for (std::uint64_t N : {1000ull, 10000ull}) {
    const auto r = experiments::stable_star_frequency(N, 6, k, dist, 10000, hash_combine(0x07, N), g_threads);
    ok = ok && r.frequency >= r.constants.stable_bound - 3 * r.se;
    d << " N=" << N << ": freq=" << fmt(r.frequency) << " bound=" << fmt(r.constants.stable_bound)
      << " se=" << fmt(r.se);
  }
  return {ok && dist.mean_truncated(6) > 1.0, d.str()};
}

// ---------------------------------------------------------------- 8
Outcome star_ordering() {
  const auto dist = graph::OffspringDistribution::geometric(0.2);
  const auto k = kernels::KernelSpec::sigma_kernel(0.2, 0, 1, 0, 1);
  experiments::StarSurvivalSpec s;
  s.N = {50, 100, 200, 400};
  s.L = 6;
  s.lambda = 0.4;
  s.horizon = 1e4;
  s.replicas = 200;
  s.seed = 0x08;
  s.threads = g_threads;
  const auto r = experiments::star_survival(k, dist, s);
  const auto& sc = r.scaling;
  bool ok = sc.increasing;
  std::ostringstream d;
  for (std::size_t i = 0; i < sc.N.size(); ++i) {
    d << "N=" << sc.N[i] << ":median=" << fmt(sc.median_time[i]);
    if (i < sc.mw_p.size()) {
      d << ",p=" << fmt(sc.mw_p[i]);
      ok = ok && sc.mw_p[i] < 0.01 && sc.median_time[i + 1] > sc.median_time[i];
    }
    d << " ";
  }
  d << "slope=" << fmt(sc.slope) << " r2=" << fmt(sc.r2);
  return {ok, d.str()};
}

// ---------------------------------------------------------------- 9
Outcome path_bound() {
  const auto k = kernels::KernelSpec::constant_p(0.4, 0.0, 1.0);
  const auto r = experiments::path_transmission({1, 2, 3, 4, 5}, 3, 0.5, k, 100000, 0x09, g_threads);
  std::ostringstream d;
  for (const auto& p : r.points) d << "r=" << p.r << ":" << fmt(p.bound) << "<=" << fmt(p.wilson.hi) << " ";
  return {r.all_ok, d.str()};
}

// ---------------------------------------------------------------- 10
Outcome percolated_tail() {
  kernels::PercolatedOffspring pd{graph::OffspringDistribution::power_law(2.5),
                                  kernels::KernelSpec::sigma_kernel(0.5, 1, 1)};
  const std::size_t n = 1000000;
  std::vector<std::uint64_t> x(n);
  parallel_for(n, g_threads, [&](unsigned, std::size_t i) {
    Rng r(hash_combine(0x0a, i));
    x[i] = kernels::sample_zeta_p(pd, r);
  });
  const auto t = kernels::tail_exponent_estimate(x);
  return {t.reliable && std::fabs(t.exponent - 4.0) <= 0.5,
          "hill=" + fmt(t.exponent) + " target=4 tail_points=" + std::to_string(t.tail_points) +
              (t.reliable ? "" : " unreliable: " + t.reason)};
}

// ---------------------------------------------------------------- 11
Outcome phase_table() {
  const std::string path = std::string(CPDG_SOURCE_DIR) + "/data/phase_truth_table.csv";
  std::ifstream f(path);
  if (!f) return {false, "cannot open " + path};
  std::string line;
  std::getline(f, line);
  int rows = 0, agree = 0;
  std::ostringstream d;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::string cell;
    bool quoted = false;
    for (char ch : line) {
      if (ch == '"') quoted = !quoted;
      else if (ch == ',' && !quoted) c.push_back(cell), cell.clear();
      else cell += ch;
    }
    c.push_back(cell);
    if (c.size() < 8) return {false, "malformed row: " + line};
    closedform::TailSpec tail{c[0] == "stretched" ? closedform::TailSpec::Kind::Stretched
                                                  : closedform::TailSpec::Kind::PowerLaw,
                              std::stod(c[1])};
    const auto r = closedform::phase_classify(std::stod(c[2]), std::stod(c[3]), std::stod(c[4]), tail, c[5] == "true");
    ++rows;
    if (closedform::to_string(r.phase) == c[6]) ++agree;
    else d << " row" << rows << ":" << closedform::to_string(r.phase) << "!=" << c[6];
  }
  return {rows == 20 && agree == rows, std::to_string(agree) + "/" + std::to_string(rows) + " rows agree" + d.str()};
}

// ---------------------------------------------------------------- 12
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome determinism() {
  bool ok = true;
  std::ostringstream d;
  const std::pair<const char*, const char*> runs[] = {{"edge-law", "edge_law.json"}, {"path", "path.json"}};
  for (const auto& [cmd, file] : runs) {
    const auto cfg = config::load_config(std::string(CPDG_SOURCE_DIR) + "/configs/" + file);
    std::string prev;
    for (unsigned th : {1u, 2u, 1u}) {
      const auto dir = g_out / ("determinism_" + std::string(cmd) + "_" + std::to_string(th));
      fs::remove_all(dir);
      std::ostringstream rep;
      cli::dispatch(cmd, cfg, {dir.string(), th}, rep);
      std::string all;
      for (const char* ext : {".report", ".csv", ".jsonl"})
        if (fs::exists(dir / (std::string(cmd) + ext))) all += slurp(dir / (std::string(cmd) + ext));
      if (!prev.empty() && all != prev) ok = false;
      prev = all;
    }
    d << cmd << "(hash " << cfg.hash_hex() << ", " << prev.size() << " bytes) ";
  }
  return {ok, d.str() + (ok ? "identical across reruns and thread counts" : "outputs differ")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance run"};
  std::string out = "acceptance_out";
  std::vector<int> only;
  unsigned threads = default_threads();
  app.add_option("--out", out, "scratch directory");
  app.add_option("--only", only, "criteria to run");
  app.add_option("--threads", threads, "worker threads");
  CLI11_PARSE(app, argc, argv);
  g_threads = std::max(1u, threads);
  g_out = out;
  fs::create_directories(g_out);

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> all = {
      {1, "edge law", 30, edge_law},
      {2, "Laplace transform", 30, laplace},
      {3, "exact oracle equivalence", 300, oracle_equivalence},
      {4, "pathwise couplings", 120, couplings},
      {5, "supermartingale decay", 120, supermartingale},
      {6, "rate bounds", 1, rate_bounds},
      {7, "stable star frequency", 600, stable_star},
      {8, "star survival ordering", 600, star_ordering},
      {9, "path lower bound", 600, path_bound},
      {10, "percolated offspring tail", 120, percolated_tail},
      {11, "phase classifier", 1, phase_table},
      {12, "determinism", 600, determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << "Criterion " << c.id << ": " << (pass ? "PASS" : "FAIL") << " [" << c.name << "] " << o.detail
              << " (" << fmt(secs) << " s" << (in_time ? "" : ", over the " + fmt(c.budget_s) + " s budget") << ")"
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
