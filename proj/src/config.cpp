#include "cpdg/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace cpdg::config {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
  return s;
}

// Reads known keys from one JSON object and reports anything left over.
class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<std::string>& errs) : j_(j), path_(std::move(path)), errs_(errs) {
    if (!j_.is_object()) err("", "expected an object");
  }
  std::string at(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  void err(const std::string& k, const std::string& msg) { errs_.push_back((k.empty() ? path_ : at(k)) + ": " + msg); }
  bool has(const std::string& k) {
    used_.insert(k);
    return j_.is_object() && j_.contains(k);
  }
  const json& raw(const std::string& k) { return j_.at(k); }

  template <class T>
  void get(const std::string& k, T& dst) {
    if (!has(k)) return;
    try {
      const json& v = j_.at(k);
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::runtime_error("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::runtime_error("expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
            throw std::runtime_error("expected a non-negative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::runtime_error("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::runtime_error("expected a string");
      }
      dst = v.get<T>();
    } catch (const std::exception& e) {
      err(k, std::string(e.what()).find("expected") == 0 ? e.what() : "wrong type");
    }
  }
  template <class T>
  void get_list(const std::string& k, std::vector<T>& dst) {
    if (!has(k)) return;
    const json& v = j_.at(k);
    std::vector<T> out;
    auto one = [&](const json& x, const std::string& where) {
      if constexpr (std::is_integral_v<T>) {
        if (!x.is_number_integer() || (!x.is_number_unsigned() && x.get<long long>() < 0)) {
          errs_.push_back(where + ": expected a non-negative integer");
          return;
        }
      } else {
        if (!x.is_number()) {
          errs_.push_back(where + ": expected a number");
          return;
        }
      }
      out.push_back(x.get<T>());
    };
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) one(v[i], at(k) + "[" + std::to_string(i) + "]");
    } else {
      one(v, at(k));
    }
    dst = out;
  }
  void finish() {
    if (!j_.is_object()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) errs_.push_back(at(it.key()) + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& errs_;
  std::set<std::string> used_;
};

void check(bool ok, std::vector<std::string>& errs, const std::string& path, const std::string& msg) {
  if (!ok) errs.push_back(path + ": " + msg);
}

bool one_of(const std::string& s, std::initializer_list<const char*> opts) {
  for (const char* o : opts)
    if (s == o) return true;
  return false;
}

void read_offspring(const json& j, const std::string& path, OffspringSpec& o, std::vector<std::string>& errs) {
  Reader r(j, path, errs);
  r.get("kind", o.kind);
  r.get("b", o.b);
  r.get("beta", o.beta);
  r.get("scale", o.scale);
  r.get("q", o.q);
  r.get("k0", o.k0);
  r.get("d", o.d);
  r.get_list("weights", o.weights);
  r.finish();
  check(one_of(o.kind, {"power_law", "stretched", "geometric", "deterministic", "tabulated"}), errs, r.at("kind"),
        "must be one of power_law|stretched|geometric|deterministic|tabulated");
  check(o.b > 1.0, errs, r.at("b"), "must be > 1");
  check(o.beta > 0.0 && o.beta < 1.0, errs, r.at("beta"), "must lie in (0,1)");
  check(o.scale > 0.0, errs, r.at("scale"), "must be > 0");
  check(o.q > 0.0 && o.q <= 1.0, errs, r.at("q"), "must lie in (0,1]");
  if (o.kind == "tabulated") check(!o.weights.empty(), errs, r.at("weights"), "required for tabulated");
}

std::vector<double> read_lambda(Reader& r, std::vector<std::string>& errs) {
  std::vector<double> out{1.0};
  if (!r.has("lambda")) return out;
  const json& v = r.raw("lambda");
  if (v.is_object()) {
    Reader g(v, r.at("lambda"), errs);
    double from = 0, to = 0;
    std::uint64_t count = 0;
    g.get("from", from);
    g.get("to", to);
    g.get("count", count);
    g.finish();
    if (count < 1 || (count == 1 && from != to) || to < from) {
      errs.push_back(r.at("lambda") + ": grid needs count >= 1 and from <= to");
      return out;
    }
    out.clear();
    for (std::uint64_t i = 0; i < count; ++i)
      out.push_back(count == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(count - 1));
    return out;
  }
  r.get_list("lambda", out);
  return out;
}

json offspring_json(const OffspringSpec& o) {
  return json{{"kind", o.kind}, {"b", o.b},   {"beta", o.beta}, {"scale", o.scale},
              {"q", o.q},       {"k0", o.k0}, {"d", o.d},       {"weights", o.weights}};
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> v) : std::runtime_error(join(v)), violations(std::move(v)) {}

graph::OffspringDistribution OffspringSpec::build() const {
  if (kind == "power_law") return graph::OffspringDistribution::power_law(b, k0);
  if (kind == "stretched") return graph::OffspringDistribution::stretched_exponential(beta, scale);
  if (kind == "geometric") return graph::OffspringDistribution::geometric(q);
  if (kind == "deterministic") return graph::OffspringDistribution::deterministic(d);
  return graph::OffspringDistribution::tabulated(weights);
}

kernels::KernelSpec KernelBlock::build() const {
  kernels::KernelSpec k = constant_p ? kernels::KernelSpec::constant_p(*constant_p, eta, nu)
                                     : kernels::KernelSpec::sigma_kernel(alpha, sigma, kappa, eta, nu);
  if (!table.empty()) k = kernels::KernelSpec::with_table_file(table, k);
  k.validate();
  return k;
}

std::string ExperimentConfig::hash_hex() const {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << hash;
  return os.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string canonicalize(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  json g{{"type", c.graph.type},
         {"path", c.graph.path},
         {"n", c.graph.n},
         {"degree", c.graph.degree},
         {"depth", c.graph.depth},
         {"offspring", offspring_json(c.graph.offspring)},
         {"N", c.graph.N},
         {"L", c.graph.L},
         {"tree_seed", c.graph.tree_seed},
         {"max_vertices", c.graph.caps.max_vertices},
         {"max_depth", c.graph.caps.max_depth}};
  j["graph"] = g;
  json k{{"alpha", c.kernel.alpha}, {"sigma", c.kernel.sigma}, {"kappa", c.kernel.kappa},
         {"eta", c.kernel.eta},     {"nu", c.kernel.nu},       {"table", c.kernel.table}};
  k["constant_p"] = c.kernel.constant_p ? json(*c.kernel.constant_p) : json(nullptr);
  j["kernel"] = k;
  j["lambda"] = c.lambda;
  j["horizon"] = c.horizon;
  j["replicas"] = c.replicas;
  j["max_infected"] = c.max_infected;
  j["init"] = c.init;
  j["variant"] = c.variant;
  j["star"] = json{{"experiment", c.star.experiment},
                   {"N", c.star.N},
                   {"L", c.star.L},
                   {"max_windows", c.star.max_windows},
                   {"alpha_level", c.star.alpha_level}};
  j["path"] = json{{"r", c.path.r}, {"degree", c.path.degree}};
  j["phase"] = json{{"alpha", c.phase.alpha}, {"eta", c.phase.eta},     {"sigma", c.phase.sigma},
                    {"tail", c.phase.tail},   {"param", c.phase.param}, {"zeta_zero", c.phase.zeta_zero}};
  j["edge_law"] = json{{"v", c.edge_law.v}, {"p", c.edge_law.p}, {"t", c.edge_law.t}, {"replicas", c.edge_law.replicas}};
  j["oracle"] = json{{"t", c.oracle.t}};
  j["check"] = json{{"weight", c.check.weight},
                    {"beta", c.check.beta},
                    {"grid", c.check.grid},
                    {"replicas", c.check.replicas}};
  return j.dump();
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError({std::string("<root>: malformed JSON: ") + e.what()});
  }
  std::vector<std::string> errs;
  ExperimentConfig c;
  Reader r(j, "", errs);
  r.get("seed", c.seed);
  if (r.has("graph")) {
    Reader g(r.raw("graph"), "graph", errs);
    g.get("type", c.graph.type);
    g.get("path", c.graph.path);
    g.get("n", c.graph.n);
    g.get("degree", c.graph.degree);
    g.get("depth", c.graph.depth);
    if (g.has("offspring")) read_offspring(g.raw("offspring"), "graph.offspring", c.graph.offspring, errs);
    g.get("N", c.graph.N);
    g.get("L", c.graph.L);
    g.get("tree_seed", c.graph.tree_seed);
    g.get("max_vertices", c.graph.caps.max_vertices);
    g.get("max_depth", c.graph.caps.max_depth);
    g.finish();
    check(one_of(c.graph.type, {"file", "bgw", "star", "complete", "star_graph", "path", "regular_tree"}), errs,
          "graph.type", "must be one of file|bgw|star|complete|star_graph|path|regular_tree");
    if (c.graph.type == "file") check(!c.graph.path.empty(), errs, "graph.path", "required for type=file");
    check(c.graph.n >= 1, errs, "graph.n", "must be >= 1");
    check(c.graph.L >= 1, errs, "graph.L", "must be >= 1");
    check(c.graph.N >= c.graph.L, errs, "graph.N", "must be >= graph.L");
  }
  if (r.has("kernel")) {
    Reader k(r.raw("kernel"), "kernel", errs);
    k.get("alpha", c.kernel.alpha);
    k.get("sigma", c.kernel.sigma);
    k.get("kappa", c.kernel.kappa);
    k.get("eta", c.kernel.eta);
    k.get("nu", c.kernel.nu);
    k.get("table", c.kernel.table);
    if (k.has("constant_p") && !k.raw("constant_p").is_null()) {
      double p = 0;
      k.get("constant_p", p);
      c.kernel.constant_p = p;
      check(p >= 0.0 && p <= 1.0, errs, "kernel.constant_p", "must lie in [0,1]");
    }
    k.finish();
  }
  check(c.kernel.alpha >= 0.0, errs, "kernel.alpha", "must be >= 0");
  check(c.kernel.sigma >= 0.0 && c.kernel.sigma <= 1.0, errs, "kernel.sigma", "must lie in [0,1]");
  check(c.kernel.kappa > 0.0, errs, "kernel.kappa", "must be > 0");
  check(c.kernel.nu > 0.0, errs, "kernel.nu", "must be > 0");
  check(std::isfinite(c.kernel.eta), errs, "kernel.eta", "must be finite");
  c.lambda = read_lambda(r, errs);
  for (std::size_t i = 0; i < c.lambda.size(); ++i)
    check(c.lambda[i] >= 0.0, errs, "lambda[" + std::to_string(i) + "]", "must be >= 0");
  check(!c.lambda.empty(), errs, "lambda", "must not be empty");
  r.get("horizon", c.horizon);
  check(c.horizon > 0.0, errs, "horizon", "must be > 0");
  r.get("replicas", c.replicas);
  check(c.replicas >= 1, errs, "replicas", "must be >= 1");
  r.get("max_infected", c.max_infected);
  r.get_list("init", c.init);
  r.get("variant", c.variant);
  check(one_of(c.variant, {"cpdg", "waitandsee", "penalised", "lowerbound"}), errs, "variant",
        "must be one of cpdg|waitandsee|penalised|lowerbound");
  if (r.has("star")) {
    Reader s(r.raw("star"), "star", errs);
    s.get("experiment", c.star.experiment);
    s.get_list("N", c.star.N);
    s.get("L", c.star.L);
    s.get("max_windows", c.star.max_windows);
    s.get("alpha_level", c.star.alpha_level);
    s.finish();
  }
  check(one_of(c.star.experiment, {"survival", "stable"}), errs, "star.experiment", "must be survival|stable");
  check(!c.star.N.empty(), errs, "star.N", "must not be empty");
  check(c.star.L >= 1, errs, "star.L", "must be >= 1");
  for (auto N : c.star.N) check(N >= c.star.L, errs, "star.N", "every N must be >= star.L");
  if (r.has("path")) {
    Reader p(r.raw("path"), "path", errs);
    p.get_list("r", c.path.r);
    p.get("degree", c.path.degree);
    p.finish();
  }
  for (auto x : c.path.r) check(x >= 1, errs, "path.r", "entries must be >= 1");
  check(c.path.degree >= 2, errs, "path.degree", "must be >= 2");
  if (r.has("phase")) {
    Reader p(r.raw("phase"), "phase", errs);
    p.get_list("alpha", c.phase.alpha);
    p.get_list("eta", c.phase.eta);
    p.get("sigma", c.phase.sigma);
    p.get("tail", c.phase.tail);
    p.get("param", c.phase.param);
    p.get("zeta_zero", c.phase.zeta_zero);
    p.finish();
  }
  check(one_of(c.phase.tail, {"power", "stretched"}), errs, "phase.tail", "must be power|stretched");
  for (double a : c.phase.alpha) check(a >= 0.0, errs, "phase.alpha", "entries must be >= 0");
  if (r.has("edge_law")) {
    Reader e(r.raw("edge_law"), "edge_law", errs);
    e.get("v", c.edge_law.v);
    e.get("p", c.edge_law.p);
    e.get_list("t", c.edge_law.t);
    e.get("replicas", c.edge_law.replicas);
    e.finish();
  }
  check(c.edge_law.v > 0.0, errs, "edge_law.v", "must be > 0");
  check(c.edge_law.p >= 0.0 && c.edge_law.p <= 1.0, errs, "edge_law.p", "must lie in [0,1]");
  if (r.has("oracle")) {
    Reader o(r.raw("oracle"), "oracle", errs);
    o.get("t", c.oracle.t);
    o.finish();
  }
  check(c.oracle.t >= 0.0, errs, "oracle.t", "must be >= 0");
  if (r.has("check")) {
    Reader k(r.raw("check"), "check", errs);
    k.get("weight", c.check.weight);
    k.get("beta", c.check.beta);
    k.get_list("grid", c.check.grid);
    k.get("replicas", c.check.replicas);
    k.finish();
  }
  check(one_of(c.check.weight, {"linear", "power", "one"}), errs, "check.weight", "must be linear|power|one");
  r.finish();
  if (!errs.empty()) throw ConfigError(errs);
  c.canonical = canonicalize(c);
  c.hash = fnv1a(c.canonical);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

graph::GraphView build_graph(const GraphSpec& g) {
  if (g.type == "file") return graph::read_graph_file(g.path);
  if (g.type == "complete") return graph::complete_graph(g.n);
  if (g.type == "star_graph") return graph::star_graph(g.n);
  if (g.type == "path") return graph::path_graph(g.n);
  if (g.type == "regular_tree") return graph::regular_tree(g.degree, g.depth);
  const auto dist = g.offspring.build();
  if (g.type == "bgw") return graph::grow_bgw(dist, g.tree_seed, g.caps);
  // star: BGW tree conditioned on the root degree, pruned to children of degree <= L
  auto t = graph::conditioned_root_degree(graph::grow_bgw(dist, g.tree_seed, g.caps), g.N);
  t.materialize(0);
  return graph::induced_star(t, 0, g.L);
}

}  // namespace cpdg::config
