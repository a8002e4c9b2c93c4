#include "cpdg/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "cpdg/closedform.hpp"
#include "cpdg/experiments.hpp"
#include "cpdg/lyapunov.hpp"
#include "cpdg/oracle.hpp"
#include "cpdg/version.hpp"

namespace cpdg::cli {

using nlohmann::ordered_json;

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}
std::string num(std::uint64_t x) { return std::to_string(x); }
std::string num(bool b) { return b ? "true" : "false"; }

class Output {
 public:
  Output(const std::string& cmd, const config::ExperimentConfig& cfg, const Flags& f) : cmd_(cmd), cfg_(cfg) {
    dir_ = f.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir_ + "': " + ec.message());
    kv("command", cmd);
    kv("config_hash", cfg.hash_hex());
    kv("seed", std::to_string(cfg.seed));
    kv("version", kVersion);
  }
  void kv(const std::string& k, const std::string& v) { report_.emplace_back(k, v); }
  template <class T>
  void kvn(const std::string& k, T v) {
    report_.emplace_back(k, num(v));
  }
  void record(ordered_json j) {
    ordered_json r;
    r["config_hash"] = cfg_.hash_hex();
    r["seed"] = cfg_.seed;
    r["version"] = kVersion;
    for (auto it = j.begin(); it != j.end(); ++it) r[it.key()] = it.value();
    jsonl_ << r.dump() << "\n";
    has_jsonl_ = true;
  }
  void csv_header(const std::vector<std::string>& cols) {
    for (const auto& c : cols) csv_ << c << ",";
    csv_ << "config_hash,seed,version\n";
  }
  void csv_row(const std::vector<std::string>& vals) {
    for (const auto& v : vals) csv_ << v << ",";
    csv_ << cfg_.hash_hex() << "," << cfg_.seed << "," << kVersion << "\n";
  }
  void fail(const std::string& what) { failures_.push_back(what); }
  int finish(std::ostream& out) {
    kv("status", failures_.empty() ? "ok" : "fail");
    if (!failures_.empty()) {
      std::string s;
      for (const auto& f : failures_) s += (s.empty() ? "" : ",") + f;
      kv("failed", s);
    }
    std::ostringstream rep;
    for (const auto& [k, v] : report_) rep << k << "=" << v << "\n";
    write(cmd_ + ".report", rep.str());
    if (!csv_.str().empty()) write(cmd_ + ".csv", csv_.str());
    if (has_jsonl_) write(cmd_ + ".jsonl", jsonl_.str());
    out << rep.str();
    return failures_.empty() ? kExitOk : kExitAssert;
  }

 private:
  void write(const std::string& name, const std::string& body) {
    const auto path = (std::filesystem::path(dir_) / name).string();
    std::ofstream f(path, std::ios::binary);
    f << body;
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
  }
  std::string cmd_, dir_;
  const config::ExperimentConfig& cfg_;
  std::vector<std::pair<std::string, std::string>> report_;
  std::ostringstream csv_, jsonl_;
  bool has_jsonl_ = false;
  std::vector<std::string> failures_;
};

std::string lam_key(const std::string& k, std::size_t i, std::size_t n) {
  return n == 1 ? k : k + "[" + std::to_string(i) + "]";
}

void cmd_simulate(const config::ExperimentConfig& c, const Flags& f, Output& o) {
  auto g = config::build_graph(c.graph);
  const auto kernel = c.kernel.build();
  o.csv_header({"lambda", "replicas", "extinct", "alive_at_horizon", "reinfected_root_late", "censored", "p_alive",
                "wilson_lo", "wilson_hi", "p_strong", "usable"});
  double prev = -1.0;
  bool monotone = true;
  for (std::size_t li = 0; li < c.lambda.size(); ++li) {
    experiments::SurvivalSpec s;
    s.lambda = c.lambda[li];
    s.horizon = c.horizon;
    s.replicas = c.replicas;
    s.max_infected = c.max_infected;
    s.init = c.init;
    s.variant = engine::parse_variant(c.variant);
    s.seed = hash_combine(c.seed, li);
    s.threads = f.threads;
    s.keep_records = true;
    const auto e = experiments::estimate_survival(g, kernel, s);
    const double half = c.horizon / 2.0;
    for (std::size_t i = 0; i < e.records.size(); ++i) {
      const auto& r = e.records[i];
      std::uint64_t late = 0;
      for (double t : r.root_reinfection_times) late += t > half;
      o.record(ordered_json{{"lambda", s.lambda},
                            {"replica", i},
                            {"replica_seed", r.seed},
                            {"extinct", r.extinct},
                            {"time", r.time},
                            {"censor", engine::to_string(r.censor)},
                            {"peak_infected", r.peak_infected},
                            {"total_events", r.total_events},
                            {"infections", r.infections},
                            {"recoveries", r.recoveries},
                            {"root_reinfections", r.root_reinfection_times.size()},
                            {"late_root_reinfections", late}});
    }
    const double pa = static_cast<double>(e.alive_at_horizon) / static_cast<double>(e.replicas);
    const double ps = static_cast<double>(e.reinfected_root_late) / static_cast<double>(e.replicas);
    o.csv_row({num(s.lambda), num(e.replicas), num(e.extinct), num(e.alive_at_horizon), num(e.reinfected_root_late),
               num(e.censored), num(pa), num(e.wilson.lo), num(e.wilson.hi), num(ps), num(e.usable)});
    const std::size_t n = c.lambda.size();
    o.kvn(lam_key("lambda", li, n), s.lambda);
    o.kvn(lam_key("p_alive", li, n), pa);
    o.kvn(lam_key("p_strong", li, n), ps);
    o.kvn(lam_key("censored", li, n), e.censored);
    if (!e.usable) o.fail(lam_key("usable", li, n));
    if (prev >= 0.0 && pa + 3.0 * stats::prop_se(pa, e.replicas) + 3.0 * stats::prop_se(prev, e.replicas) < prev)
      monotone = false;
    prev = pa;
  }
  o.kvn("monotone_in_lambda", monotone);
  o.kv("weak_survival_proxy", "alive_at_horizon");
  o.kv("strong_survival_proxy", "root_reinfected_after_half_horizon");
}

void cmd_star(const config::ExperimentConfig& c, const Flags& f, Output& o) {
  const auto kernel = c.kernel.build();
  const auto dist = c.graph.offspring.build();
  if (c.star.experiment == "stable") {
    o.csv_header({"N", "L", "replicas", "stable", "frequency", "se", "stable_bound", "threshold", "windows"});
    for (auto N : c.star.N) {
      const auto r = experiments::stable_star_frequency(N, c.star.L, kernel, dist, c.replicas,
                                                        hash_combine(c.seed, N), f.threads);
      for (std::size_t i = 0; i < r.min_good.size(); ++i)
        o.record(ordered_json{{"N", N}, {"replica", i}, {"min_good", r.min_good[i]},
                              {"stable_star", static_cast<double>(r.min_good[i]) > r.constants.threshold}});
      o.csv_row({num(N), num(c.star.L), num(r.replicas), num(r.stable), num(r.frequency), num(r.se),
                 num(r.constants.stable_bound), num(r.constants.threshold), num(r.constants.stable_windows + 1)});
      const std::string k = "N" + std::to_string(N);
      o.kvn(k + ".frequency", r.frequency);
      o.kvn(k + ".stable_bound", r.constants.stable_bound);
      o.kvn(k + ".underpowered", r.constants.underpowered);
      if (r.frequency < r.constants.stable_bound - 3.0 * r.se) o.fail(k + ".stable_frequency");
    }
    return;
  }
  o.csv_header({"lambda", "N", "L", "replicas", "median_time", "censored", "mw_p_next", "T", "threshold",
                "stable_bound", "k_bar", "stable_fraction", "local_survival_ok", "kickstart_ok", "underpowered"});
  for (std::size_t li = 0; li < c.lambda.size(); ++li) {
    experiments::StarSurvivalSpec s;
    s.N = c.star.N;
    s.L = c.star.L;
    s.lambda = c.lambda[li];
    s.horizon = c.horizon;
    s.replicas = c.replicas;
    s.max_windows = c.star.max_windows;
    s.seed = hash_combine(c.seed, li);
    s.threads = f.threads;
    s.alpha_level = c.star.alpha_level;
    const auto r = experiments::star_survival(kernel, dist, s);
    for (const auto& x : r.records)
      o.record(ordered_json{{"lambda", x.lambda},
                            {"N", x.N},
                            {"L", x.L},
                            {"replica", x.replica},
                            {"replica_seed", x.seed},
                            {"children", x.children},
                            {"good_neighbour_minimum", x.good_neighbour_minimum},
                            {"windows_checked", x.windows_checked},
                            {"stable_star", x.stable_star},
                            {"extinction_time", x.extinction_time},
                            {"censored", x.censored}});
    const auto& sc = r.scaling;
    for (std::size_t i = 0; i < sc.N.size(); ++i) {
      std::uint64_t cens = 0, stable = 0, n = 0;
      for (const auto& x : r.records)
        if (x.N == sc.N[i]) ++n, cens += x.censored, stable += x.stable_star;
      const auto& k = sc.constants[i];
      o.csv_row({num(s.lambda), num(sc.N[i]), num(s.L), num(n), num(sc.median_time[i]), num(cens),
                 i < sc.mw_p.size() ? num(sc.mw_p[i]) : "", num(k.T), num(k.threshold), num(k.stable_bound),
                 num(k.k_bar), num(static_cast<double>(stable) / static_cast<double>(n)), num(k.local_survival_ok),
                 num(k.kickstart_ok), num(k.underpowered)});
    }
    const std::size_t n = c.lambda.size();
    o.kvn(lam_key("increasing", li, n), sc.increasing);
    o.kvn(lam_key("log_median_slope", li, n), sc.slope);
    o.kvn(lam_key("log_median_r2", li, n), sc.r2);
    if (!sc.increasing) o.fail(lam_key("increasing", li, n));
  }
}

void cmd_path(const config::ExperimentConfig& c, const Flags& f, Output& o) {
  const auto kernel = c.kernel.build();
  std::vector<std::size_t> rs(c.path.r.begin(), c.path.r.end());
  o.csv_header({"lambda", "r", "degree", "replicas", "hits", "empirical", "wilson_lo", "wilson_hi", "bound", "bound_ok"});
  for (std::size_t li = 0; li < c.lambda.size(); ++li) {
    const auto r = experiments::path_transmission(rs, c.path.degree, c.lambda[li], kernel, c.replicas,
                                                  hash_combine(c.seed, li), f.threads);
    for (const auto& p : r.points)
      o.csv_row({num(c.lambda[li]), num(static_cast<std::uint64_t>(p.r)), num(static_cast<std::uint64_t>(c.path.degree)),
                 num(p.replicas), num(p.hits), num(p.empirical), num(p.wilson.lo), num(p.wilson.hi), num(p.bound),
                 num(p.bound_ok)});
    const std::size_t n = c.lambda.size();
    o.kvn(lam_key("bound_below_ucl", li, n), r.all_ok);
    o.kvn(lam_key("log_linear_r2", li, n), r.log_linear_r2);
    if (!r.all_ok) o.fail(lam_key("bound_below_ucl", li, n));
  }
}

void cmd_phase(const config::ExperimentConfig& c, const Flags&, Output& o) {
  closedform::TailSpec tail;
  tail.kind = c.phase.tail == "stretched" ? closedform::TailSpec::Kind::Stretched : closedform::TailSpec::Kind::PowerLaw;
  tail.param = c.phase.param;
  o.csv_header({"alpha", "eta", "sigma", "tail", "param", "zeta_zero", "phase", "rule", "lambda2_finite"});
  closedform::PhaseResult last;
  for (double a : c.phase.alpha)
    for (double e : c.phase.eta) {
      last = closedform::phase_classify(a, c.phase.sigma, e, tail, c.phase.zeta_zero);
      o.csv_row({num(a), num(e), num(c.phase.sigma), c.phase.tail, num(c.phase.param), num(c.phase.zeta_zero),
                 closedform::to_string(last.phase), last.rule, num(last.lambda2_finite)});
    }
  o.kvn("points", static_cast<std::uint64_t>(c.phase.alpha.size() * c.phase.eta.size()));
  if (c.phase.alpha.size() * c.phase.eta.size() == 1) {
    o.kv("phase", closedform::to_string(last.phase));
    o.kv("rule", last.rule);
    o.kvn("lambda2_finite", last.lambda2_finite);
  }
}

void cmd_edge_law(const config::ExperimentConfig& c, const Flags& f, Output& o) {
  const double v = c.edge_law.v, p = c.edge_law.p;
  o.csv_header({"lambda", "v", "p", "transmission_prob", "a", "b", "lower_bound_rate", "mean_time", "mc_prob", "mc_se"});
  for (std::size_t li = 0; li < c.lambda.size(); ++li) {
    const double lam = c.lambda[li];
    const auto law = closedform::make_edge_law(lam, v, p);
    const double tp = closedform::transmission_prob(lam, v, p);
    const std::size_t n = c.lambda.size();
    o.kvn(lam_key("lambda", li, n), lam);
    o.kvn(lam_key("transmission_prob", li, n), tp);
    o.kvn(lam_key("a", li, n), law.a);
    o.kvn(lam_key("b", li, n), law.b);
    o.kvn(lam_key("lower_bound_rate", li, n), closedform::lower_bound_rate(lam, v, p));
    o.kvn(lam_key("mean_time", li, n), closedform::transmission_time_mean(law));
    for (double t : c.edge_law.t) o.kvn(lam_key("tail_" + num(t), li, n), closedform::transmission_time_tail(law, t));
    std::string mcp, mcse;
    if (c.edge_law.replicas > 0) {
      const auto mc = experiments::edge_law_mc(lam, v, p, c.edge_law.replicas, hash_combine(c.seed, li),
                                               c.edge_law.t, f.threads);
      const double ph = static_cast<double>(mc.successes) / static_cast<double>(mc.n);
      const double se = stats::prop_se(tp, mc.n);
      mcp = num(ph);
      mcse = num(se);
      o.kvn(lam_key("mc_prob", li, n), ph);
      o.kvn(lam_key("mc_se", li, n), se);
      if (std::fabs(ph - tp) > 3.0 * se) o.fail(lam_key("mc_prob", li, n));
    }
    o.csv_row({num(lam), num(v), num(p), num(tp), num(law.a), num(law.b), num(closedform::lower_bound_rate(lam, v, p)),
               num(closedform::transmission_time_mean(law)), mcp, mcse});
  }
}

void cmd_oracle(const config::ExperimentConfig& c, const Flags&, Output& o) {
  const auto g = config::build_graph(c.graph);
  const auto kernel = c.kernel.build();
  std::uint32_t c0 = 0;
  for (auto v : c.init) {
    if (v >= g.num_vertices()) throw std::invalid_argument("init vertex out of range");
    c0 |= 1u << v;
  }
  o.csv_header({"lambda", "t", "states", "p_alive_t", "p_extinct", "mean_extinction_time"});
  for (std::size_t li = 0; li < c.lambda.size(); ++li) {
    const auto m = oracle::build_exact(g, kernel, c.lambda[li]);
    const auto pi0 = oracle::initial_distribution(m, c0);
    const double alive = oracle::transient_prob(m, pi0, c.oracle.t, [](std::uint32_t cm, std::uint32_t) { return cm != 0; });
    const auto es = oracle::extinction_stats(m, pi0);
    const std::size_t n = c.lambda.size();
    o.kvn(lam_key("lambda", li, n), c.lambda[li]);
    o.kvn(lam_key("states", li, n), static_cast<std::uint64_t>(m.states));
    o.kvn(lam_key("p_alive_t", li, n), alive);
    o.kvn(lam_key("p_extinct", li, n), es.p_extinct);
    o.kvn(lam_key("mean_extinction_time", li, n), es.mean_time);
    o.csv_row({num(c.lambda[li]), num(c.oracle.t), num(static_cast<std::uint64_t>(m.states)), num(alive),
               num(es.p_extinct), num(es.mean_time)});
  }
}

void cmd_check(const config::ExperimentConfig& c, const Flags& f, Output& o) {
  const auto g = config::build_graph(c.graph);
  const auto kernel = c.kernel.build();
  lyapunov::WeightFunction W = c.check.weight == "linear"  ? lyapunov::WeightFunction::linear()
                               : c.check.weight == "power" ? lyapunov::WeightFunction::power(c.check.beta)
                                                           : lyapunov::WeightFunction::constant_one();
  o.kv("weight", W.describe());
  const auto rep0 = lyapunov::check_conditions(g, kernel, W, 0.0);
  o.kvn("K", rep0.K);
  o.kvn("K_condition_weight", rep0.K0);
  o.kvn("K_condition_speed", rep0.K1);
  o.kvn("v_min", rep0.v_min);
  o.kvn("lambda_star", rep0.lambda_star);
  o.kvn("vertices_checked", static_cast<std::uint64_t>(rep0.vertices_checked));
  o.kvn("partial_ball", rep0.partial);
  const bool trace = !c.check.grid.empty() && c.check.replicas > 0;
  if (trace) o.csv_header({"lambda", "t", "mean_f", "se_f", "bound", "ok", "asserted"});
  for (std::size_t li = 0; li < c.lambda.size(); ++li) {
    const double lam = c.lambda[li];
    const std::size_t n = c.lambda.size();
    o.kvn(lam_key("lambda", li, n), lam);
    o.kvn(lam_key("theta", li, n), lyapunov::theta(lam, rep0.K, rep0.v_min));
    if (!trace) continue;
    const auto tr = lyapunov::supermartingale_trace(g, kernel, lam, W, c.init, c.check.grid, c.check.replicas,
                                                    hash_combine(c.seed, li), f.threads);
    for (const auto& p : tr.points)
      o.csv_row({num(lam), num(p.t), num(p.mean_f), num(p.se_f), num(p.bound), num(p.ok), num(tr.asserted)});
    o.kvn(lam_key("trace_asserted", li, n), tr.asserted);
    o.kvn(lam_key("trace_pass", li, n), tr.pass);
    if (tr.asserted && !tr.pass) o.fail(lam_key("supermartingale", li, n));
  }
}

}  // namespace

bool known_command(const std::string& cmd) {
  for (const char* k : {"simulate", "star", "path", "phase", "edge-law", "oracle", "check"})
    if (cmd == k) return true;
  return false;
}

int dispatch(const std::string& cmd, const config::ExperimentConfig& cfg, const Flags& flags, std::ostream& out) {
  if (!known_command(cmd)) throw std::invalid_argument("unknown subcommand '" + cmd + "'");
  Output o(cmd, cfg, flags);
  if (cmd == "simulate") cmd_simulate(cfg, flags, o);
  else if (cmd == "star") cmd_star(cfg, flags, o);
  else if (cmd == "path") cmd_path(cfg, flags, o);
  else if (cmd == "phase") cmd_phase(cfg, flags, o);
  else if (cmd == "edge-law") cmd_edge_law(cfg, flags, o);
  else if (cmd == "oracle") cmd_oracle(cfg, flags, o);
  else cmd_check(cfg, flags, o);
  return o.finish(out);
}

}  // namespace cpdg::cli
