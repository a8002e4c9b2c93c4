#include "cpdg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpdg/parallel.hpp"

namespace cpdg::experiments {

namespace {
constexpr std::uint64_t kGoodTag = 0x676f6f64ULL;
constexpr std::uint64_t kStarTag = 0x73746172ULL;
}  // namespace

// ------------------------------------------------------------------ survival

SurvivalEstimate estimate_survival(const graph::GraphView& g, const kernels::KernelSpec& kernel,
                                   const SurvivalSpec& spec) {
  if (spec.replicas < 1) throw ExperimentError("replicas must be >= 1");
  if (!(spec.horizon > 0.0)) throw ExperimentError("horizon must be > 0");
  SurvivalEstimate est;
  est.lambda = spec.lambda;
  est.replicas = spec.replicas;
  std::vector<engine::TrajectoryRecord> recs(spec.replicas);
  std::vector<graph::GraphView> graphs(std::max(1u, spec.threads), g);
  parallel_for(spec.replicas, spec.threads, [&](unsigned w, std::size_t i) {
    engine::RunCaps caps{spec.horizon, spec.max_infected};
    const std::uint64_t s = engine::replica_seed(spec.seed, i);
    if (g.lazy()) {
      graph::GraphView local = g;  // fresh tree per replica keeps caps replica-local
      recs[i] = engine::run_replica(local, kernel, spec.lambda, spec.variant, spec.init, caps, s);
    } else {
      recs[i] = engine::run_replica(graphs[w], kernel, spec.lambda, spec.variant, spec.init, caps, s);
    }
  });
  const double half = spec.horizon / 2.0;
  for (const auto& r : recs) {
    if (r.extinct)
      ++est.extinct;
    else if (r.censor == engine::Censor::Horizon)
      ++est.alive_at_horizon;
    else
      ++est.censored;
    if (std::any_of(r.root_reinfection_times.begin(), r.root_reinfection_times.end(),
                    [&](double t) { return t > half; }))
      ++est.reinfected_root_late;
  }
  est.wilson = stats::wilson(est.alive_at_horizon, est.replicas);
  est.wilson_strong = stats::wilson(est.reinfected_root_late, est.replicas);
  est.usable = est.censored < est.replicas;
  if (spec.keep_records) est.records = std::move(recs);
  return est;
}

Bracket bracket_lambda(const graph::GraphView& g, const kernels::KernelSpec& kernel, SurvivalSpec spec, double target,
                       double lambda_lo, double lambda_hi, std::size_t iterations) {
  if (!(lambda_lo >= 0.0) || !(lambda_hi > lambda_lo))
    throw ExperimentError("bracket_lambda: need 0 <= lambda_lo < lambda_hi");
  if (!(target > 0.0 && target < 1.0)) throw ExperimentError("bracket_lambda: target must lie in (0,1)");
  auto surv = [&](double lam) {
    spec.lambda = lam;
    spec.keep_records = false;
    const auto e = estimate_survival(g, kernel, spec);
    return static_cast<double>(e.alive_at_horizon) / static_cast<double>(e.replicas);
  };
  Bracket b;
  b.lo = lambda_lo;
  b.hi = lambda_hi;
  b.p_lo = surv(b.lo);
  b.p_hi = surv(b.hi);
  if (!(b.p_lo < target && b.p_hi >= target)) {
    b.bracketed = false;
    b.diagnostic = "initial range does not bracket the target: p(lo)=" + std::to_string(b.p_lo) +
                   " p(hi)=" + std::to_string(b.p_hi) + " target=" + std::to_string(target);
    return b;
  }
  for (std::size_t it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (b.lo + b.hi);
    const double pm = surv(mid);
    if (pm >= target) {
      b.hi = mid;
      b.p_hi = pm;
    } else {
      b.lo = mid;
      b.p_lo = pm;
    }
    ++b.iterations;
  }
  return b;
}

// -------------------------------------------------------------- edge law / sums

EdgeLawMC edge_law_mc(double lambda, double v, double p, std::uint64_t n, std::uint64_t seed,
                      const std::vector<double>& tail_times, unsigned threads) {
  EdgeLawMC out;
  out.lambda = lambda;
  out.v = v;
  out.p = p;
  out.n = n;
  out.tail_times = tail_times;
  const auto kernel = kernels::KernelSpec::constant_p(p, 0.0, v);
  const auto base = graph::complete_graph(2);
  threads = std::max(1u, threads);
  std::vector<graph::GraphView> graphs(threads, base);
  // per-replica results; aggregated after the loop so the outcome is thread-count free
  std::vector<double> hit(n, -1.0);
  std::vector<std::unique_ptr<engine::Simulator>> sims(threads);
  parallel_for(n, threads, [&](unsigned w, std::size_t i) {
    if (!sims[w]) {
      engine::Options o;
      o.lambda = lambda;
      o.initial = engine::InitialBackground::AllClosed;
      o.target = 1;
      sims[w] = std::make_unique<engine::Simulator>(graphs[w], kernel, o);
    }
    auto& sim = *sims[w];
    sim.reset(engine::replica_seed(seed, i), {engine::LayerSpec{engine::Variant::CPDG, 1.0, {0}}});
    sim.run();
    hit[i] = sim.record(0).target_hit_time;
  });
  out.tail_counts.assign(tail_times.size(), 0);
  for (double h : hit) {
    if (h < 0.0) continue;
    ++out.successes;
    for (std::size_t j = 0; j < tail_times.size(); ++j)
      if (h > tail_times[j]) ++out.tail_counts[j];
  }
  return out;
}

double sample_geom_sum(double alpha, double beta, double q, Rng& rng) {
  double t = 0.0;
  do {
    t += rng.exponential(alpha) + rng.exponential(beta);
  } while (!(rng.uniform() < q));
  return t;
}

LaplaceMC laplace_mc(double alpha, double beta, double q, double theta, std::uint64_t n, std::uint64_t seed) {
  Rng rng(seed);
  double s = 0.0, s2 = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double x = std::exp(-theta * sample_geom_sum(alpha, beta, q, rng));
    s += x;
    s2 += x * x;
  }
  LaplaceMC r;
  r.n = n;
  r.mean = s / static_cast<double>(n);
  r.se = std::sqrt(std::max(0.0, s2 / static_cast<double>(n) - r.mean * r.mean) / static_cast<double>(n));
  r.exact = closedform::geom_exp_laplace(alpha, beta, q, theta);
  return r;
}

// ----------------------------------------------------------------------- stars

GoodNeighbourTrace good_neighbours(const graph::GraphView& star, const kernels::KernelSpec& kernel, double T,
                                   std::uint64_t windows, std::uint64_t seed, bool keep_counts) {
  GoodNeighbourTrace tr;
  tr.windows = windows;
  if (windows == 0) return tr;
  std::vector<std::int64_t> diff(windows + 1, 0);
  const auto W = static_cast<std::int64_t>(windows);
  const double end = static_cast<double>(windows + 1) * T;
  const std::uint32_t d0 = star.degree(0);
  for (const auto& a : star.neighbors(0)) {
    const std::uint32_t dy = star.degree(a.to);
    const double p = kernel.p(d0, dy), v = kernel.v(d0, dy);
    const double rate = 1.0 + v;
    Rng rng(hash_combine(seed, star.vertex_key(a.to), kGoodTag));
    bool open = rng.uniform() < p;
    double prev = -1.0;
    for (;;) {
      const double next = (prev < 0.0 ? 0.0 : prev) + rng.exponential(rate);
      if (open) {
        // windows J_k = [(k-2)T, (k+2)T) ∩ R+ lying inside the event-free gap (prev, next)
        const std::int64_t k_lo = prev < 0.0 ? 0 : static_cast<std::int64_t>(std::floor(prev / T)) + 3;
        const std::int64_t k_hi = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(next / T)) - 2, W - 1);
        if (k_lo <= k_hi) {
          ++diff[static_cast<std::size_t>(k_lo)];
          --diff[static_cast<std::size_t>(k_hi + 1)];
        }
      }
      if (next > end) break;
      if (rng.uniform() * rate < v) open = rng.uniform() < p;  // update; otherwise a recovery mark
      prev = next;
    }
  }
  std::int64_t run = 0;
  tr.min_good = std::numeric_limits<std::uint64_t>::max();
  if (keep_counts) tr.counts.resize(windows);
  for (std::uint64_t k = 0; k < windows; ++k) {
    run += diff[k];
    const auto c = static_cast<std::uint64_t>(run);
    if (keep_counts) tr.counts[k] = static_cast<std::uint32_t>(c);
    if (c < tr.min_good) {
      tr.min_good = c;
      tr.argmin = k;
    }
  }
  return tr;
}

namespace {
graph::GraphView star_instance(const graph::OffspringDistribution& dist, std::uint64_t N, std::uint64_t L,
                               std::uint64_t tree_seed) {
  auto g = graph::grow_bgw(dist, tree_seed, graph::Caps{}, N);
  g.materialize(0);
  return graph::induced_star(g, 0, L);
}
}  // namespace

StableStarResult stable_star_frequency(std::uint64_t N, std::uint64_t L, const kernels::KernelSpec& kernel,
                                       const graph::OffspringDistribution& dist, std::uint64_t replicas,
                                       std::uint64_t seed, unsigned threads) {
  if (!dist.in_support(N)) throw ExperimentError("root degree N outside the offspring support");
  StableStarResult r;
  r.N = N;
  r.L = L;
  r.replicas = replicas;
  r.constants = closedform::star_constants(N, L, 0.0, kernel, dist);
  const double thr = r.constants.threshold;
  const auto windows = static_cast<std::uint64_t>(r.constants.stable_windows) + 1;  // k = 0..⌊e^{c_L N p}⌋
  r.min_good.assign(replicas, 0);
  const std::uint64_t base = hash_combine(seed, N, kStarTag);
  parallel_for(replicas, threads, [&](unsigned, std::size_t i) {
    const std::uint64_t s = engine::replica_seed(base, i);
    const auto star = star_instance(dist, N, L, s);
    r.min_good[i] = good_neighbours(star, kernel, r.constants.T, windows, s).min_good;
  });
  for (auto m : r.min_good)
    if (static_cast<double>(m) > thr) ++r.stable;
  r.frequency = static_cast<double>(r.stable) / static_cast<double>(replicas);
  r.se = stats::prop_se(r.frequency, replicas);
  return r;
}

StarSurvivalResult star_survival(const kernels::KernelSpec& kernel, const graph::OffspringDistribution& dist,
                                 const StarSurvivalSpec& spec) {
  if (spec.N.empty()) throw ExperimentError("star_survival: empty N list");
  StarSurvivalResult out;
  std::vector<std::vector<double>> times;
  for (std::uint64_t N : spec.N) {
    if (!dist.in_support(N)) throw ExperimentError("root degree N=" + std::to_string(N) + " outside support");
    const auto sc = closedform::star_constants(N, spec.L, spec.lambda, kernel, dist);
    out.scaling.constants.push_back(sc);
    const double by_horizon = std::floor(spec.horizon / sc.T) + 1.0;
    const double want = std::max(sc.stable_windows + 1.0, std::min(sc.k_bar + 1.0, by_horizon));
    const auto windows = static_cast<std::uint64_t>(std::min(want, static_cast<double>(spec.max_windows)));
    const auto stable_k = static_cast<std::uint64_t>(sc.stable_windows) + 1;
    std::vector<StarExperimentRecord> recs(spec.replicas);
    const std::uint64_t base = hash_combine(spec.seed, N, kStarTag);
    parallel_for(spec.replicas, spec.threads, [&](unsigned, std::size_t i) {
      const std::uint64_t s = engine::replica_seed(base, i);
      auto star = star_instance(dist, N, spec.L, s);
      auto& rec = recs[i];
      rec.N = N;
      rec.L = spec.L;
      rec.replica = i;
      rec.lambda = spec.lambda;
      rec.seed = s;
      rec.children = star.degree(0) > 0 ? star.neighbors(0).size() : 0;
      const auto tr = good_neighbours(star, kernel, sc.T, windows, s, true);
      rec.good_neighbour_minimum = tr.min_good;
      rec.windows_checked = windows;
      bool stable = stable_k <= windows;
      for (std::uint64_t k = 0; k < std::min(stable_k, windows); ++k)
        if (!(static_cast<double>(tr.counts[k]) > sc.threshold)) stable = false;
      rec.stable_star = stable;
      const auto tj = engine::run_replica(star, kernel, spec.lambda, engine::Variant::CPDG, {0},
                                          engine::RunCaps{spec.horizon, std::numeric_limits<std::uint64_t>::max()},
                                          s);
      rec.extinction_time = tj.time;
      rec.censored = !tj.extinct;
    });
    std::vector<double> t;
    for (const auto& r : recs) t.push_back(r.extinction_time);
    times.push_back(t);
    out.scaling.N.push_back(N);
    out.scaling.median_time.push_back(stats::median(t));
    out.records.insert(out.records.end(), recs.begin(), recs.end());
  }
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const auto mw = stats::mann_whitney_greater(times[i], times[i + 1]);
    out.scaling.mw_p.push_back(mw.p_value);
    if (!(mw.p_value < spec.alpha_level)) out.scaling.increasing = false;
  }
  if (times.size() >= 2) {
    std::vector<double> x, y;
    const double ex = 1.0 - kernel.alpha - 2.0 * std::max(kernel.eta, 0.0);
    for (std::size_t i = 0; i < times.size(); ++i) {
      x.push_back(std::pow(static_cast<double>(out.scaling.N[i]), ex));
      y.push_back(std::log(std::max(out.scaling.median_time[i], 1e-300)));
    }
    const auto fit = stats::linear_fit(x, y);
    out.scaling.slope = fit.slope;
    out.scaling.r2 = fit.r2;
  }
  return out;
}

// ----------------------------------------------------------------------- paths

PathResult path_transmission(const std::vector<std::size_t>& rs, std::uint32_t degree, double lambda,
                             const kernels::KernelSpec& kernel, std::uint64_t replicas, std::uint64_t seed,
                             unsigned threads) {
  PathResult out;
  threads = std::max(1u, threads);
  std::vector<double> xs, ys;
  for (std::size_t r : rs) {
    if (r < 1) throw ExperimentError("path length must be >= 1");
    const std::vector<std::uint32_t> degrees(r + 1, degree);
    const auto base = graph::path_with_leaves(degrees);
    std::vector<graph::GraphView> graphs(threads, base);
    std::vector<std::uint8_t> hit(replicas, 0);
    const std::uint64_t sr = hash_combine(seed, r);
    std::vector<std::unique_ptr<engine::Simulator>> sims(threads);
    parallel_for(replicas, threads, [&](unsigned w, std::size_t i) {
      if (!sims[w]) {
        engine::Options o;
        o.lambda = lambda;
        o.caps.horizon = 4.0 * static_cast<double>(r);
        o.target = static_cast<graph::VertexId>(r);
        sims[w] = std::make_unique<engine::Simulator>(graphs[w], kernel, o);
      }
      auto& sim = *sims[w];
      sim.reset(engine::replica_seed(sr, i), {engine::LayerSpec{engine::Variant::CPDG, 1.0, {0}}});
      sim.run();
      hit[i] = sim.record(0).target_hit_time >= 0.0;
    });
    PathPoint pt;
    pt.r = r;
    pt.replicas = replicas;
    for (auto h : hit) pt.hits += h;
    pt.empirical = static_cast<double>(pt.hits) / static_cast<double>(replicas);
    pt.wilson = stats::wilson(pt.hits, replicas);
    pt.bound = closedform::path_lower_bound(degrees, lambda, kernel).bound;
    pt.bound_ok = pt.bound <= pt.wilson.hi;
    out.all_ok = out.all_ok && pt.bound_ok;
    if (pt.hits > 0) {
      xs.push_back(static_cast<double>(r));
      ys.push_back(std::log(pt.empirical));
    }
    out.points.push_back(pt);
  }
  if (xs.size() >= 2) out.log_linear_r2 = stats::linear_fit(xs, ys).r2;
  return out;
}

// ---------------------------------------------------------- penalised limit

PenalisedReport penalised_comparison(const graph::GraphView& g, const kernels::KernelSpec& kernel,
                                     const std::vector<double>& nus, SurvivalSpec spec) {
  if (!std::is_sorted(nus.begin(), nus.end())) throw ExperimentError("nu list must be increasing");
  PenalisedReport rep;
  spec.keep_records = false;
  auto frac = [&](const SurvivalEstimate& e) {
    return static_cast<double>(e.alive_at_horizon) / static_cast<double>(e.replicas);
  };
  for (double nu : nus) {
    auto k = kernel;
    k.nu = nu;
    PenalisedRow row;
    row.nu = nu;
    spec.variant = engine::Variant::CPDG;
    row.p_cpdg = frac(estimate_survival(g, k, spec));
    spec.variant = engine::Variant::Penalised;
    row.p_penalised = frac(estimate_survival(g, k, spec));
    spec.variant = engine::Variant::LowerBound;
    row.p_lower = frac(estimate_survival(g, k, spec));
    row.se_cpdg = stats::prop_se(row.p_cpdg, spec.replicas);
    row.se_penalised = stats::prop_se(row.p_penalised, spec.replicas);
    row.se_lower = stats::prop_se(row.p_lower, spec.replicas);
    row.lower_le_cpdg = row.p_lower <= row.p_cpdg + 3.0 * std::hypot(row.se_lower, row.se_cpdg);
    row.gap = std::fabs(row.p_cpdg - row.p_penalised);
    rep.ordering_ok = rep.ordering_ok && row.lower_le_cpdg;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace cpdg::experiments
