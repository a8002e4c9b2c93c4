#include "cpdg/graph.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace cpdg::graph {

namespace {
constexpr double kMassTol = 1e-12;
constexpr std::size_t kMaxTable = std::size_t{1} << 20;

// Σ_{k>K} k^{-s} by Euler–Maclaurin (K large)
double zeta_tail(double s, double K) {
  return std::pow(K, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(K, -s) + s * std::pow(K, -s - 1.0) / 12.0 -
         s * (s + 1.0) * (s + 2.0) * std::pow(K, -s - 3.0) / 720.0;
}
}  // namespace

// ---------------------------------------------------------------- distributions

void OffspringDistribution::build_table(const std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw GraphError("offspring distribution has zero total weight");
  auto t = std::make_shared<Table>();
  t->pmf.resize(weights.size());
  t->cdf.resize(weights.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] < 0.0) throw GraphError("negative pmf weight");
    t->pmf[k] = weights[k] / total;
    acc += t->pmf[k];
    t->cdf[k] = acc;
  }
  t->cdf.back() = 1.0;
  tab_ = std::move(t);
}

OffspringDistribution OffspringDistribution::power_law(double b, std::uint64_t k0) {
  if (!(b > 1.0)) throw GraphError("power law exponent b must exceed 1");
  OffspringDistribution d;
  d.kind_ = Kind::PowerLaw;
  d.b_ = b;
  d.k0_ = k0;
  const std::uint64_t start = std::max<std::uint64_t>(k0, 1);
  // table length: until the analytic tail is below tolerance or the cap
  std::size_t K = std::max<std::size_t>(start + 1024, 4096);
  while (K < kMaxTable && zeta_tail(b, static_cast<double>(K)) > 1e-3 * kMassTol) K *= 2;
  K = std::min(K, kMaxTable);
  std::vector<double> w(K + 1, 0.0);
  double head = 0.0;
  for (std::size_t k = start; k <= K; ++k) head += (w[k] = std::pow(static_cast<double>(k), -b));
  const double tail = zeta_tail(b, static_cast<double>(K));
  d.norm_ = head + tail;
  d.tail_mass_ = tail / d.norm_;
  auto t = std::make_shared<Table>();
  t->pmf.resize(K + 1);
  t->cdf.resize(K + 1);
  double acc = 0.0;
  for (std::size_t k = 0; k <= K; ++k) {
    t->pmf[k] = w[k] / d.norm_;
    acc += t->pmf[k];
    t->cdf[k] = acc;
  }
  d.tab_ = std::move(t);
  return d;
}

OffspringDistribution OffspringDistribution::stretched_exponential(double beta, double scale) {
  if (!(beta > 0.0 && beta < 1.0)) throw GraphError("stretched exponential beta must lie in (0,1)");
  if (!(scale > 0.0)) throw GraphError("stretched exponential scale must be positive");
  OffspringDistribution d;
  d.kind_ = Kind::StretchedExponential;
  d.beta_ = beta;
  d.scale_ = scale;
  std::vector<double> w;
  double sum = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double x = std::pow(static_cast<double>(k) / scale, beta);
    w.push_back(std::exp(-x));
    sum += w.back();
    if (k > 16) {
      const double rest = scale / beta * boost::math::tgamma(1.0 / beta, x);
      if (rest < kMassTol * sum) break;
    }
    if (w.size() >= kMaxTable) {
      d.truncated_ = true;
      break;
    }
  }
  d.build_table(w);
  return d;
}

OffspringDistribution OffspringDistribution::geometric(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw GraphError("geometric parameter q must lie in (0,1]");
  OffspringDistribution d;
  d.kind_ = Kind::Geometric;
  d.q_ = q;
  std::vector<double> w;
  double surv = 1.0;
  while (surv > kMassTol && w.size() < kMaxTable) {
    w.push_back(surv * q);
    surv *= (1.0 - q);
  }
  if (surv > kMassTol) d.truncated_ = true;
  d.build_table(w);
  return d;
}

OffspringDistribution OffspringDistribution::deterministic(std::uint64_t k) {
  OffspringDistribution d;
  d.kind_ = Kind::Deterministic;
  d.d_ = k;
  return d;
}

OffspringDistribution OffspringDistribution::tabulated(std::vector<double> weights) {
  if (weights.empty()) throw GraphError("tabulated pmf is empty");
  OffspringDistribution d;
  d.kind_ = Kind::Tabulated;
  d.build_table(weights);
  return d;
}

std::string OffspringDistribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::PowerLaw: os << "PowerLaw(b=" << b_ << ",k0=" << k0_ << ")"; break;
    case Kind::StretchedExponential: os << "StretchedExponential(beta=" << beta_ << ",scale=" << scale_ << ")"; break;
    case Kind::Geometric: os << "Geometric(q=" << q_ << ")"; break;
    case Kind::Deterministic: os << "Deterministic(" << d_ << ")"; break;
    case Kind::Tabulated: os << "Tabulated(n=" << tab_->pmf.size() << ")"; break;
  }
  return os.str();
}

double OffspringDistribution::pmf(std::uint64_t k) const {
  if (kind_ == Kind::Deterministic) return k == d_ ? 1.0 : 0.0;
  if (k < tab_->pmf.size()) return tab_->pmf[k];
  if (kind_ == Kind::PowerLaw) return std::pow(static_cast<double>(k), -b_) / norm_;
  if (kind_ == Kind::Geometric) return q_ * std::pow(1.0 - q_, static_cast<double>(k));
  return 0.0;
}

bool OffspringDistribution::in_support(std::uint64_t k) const {
  switch (kind_) {
    case Kind::Deterministic: return k == d_;
    case Kind::Geometric: return q_ < 1.0 || k == 0;
    case Kind::StretchedExponential: return true;
    case Kind::PowerLaw: return k >= std::max<std::uint64_t>(k0_, 1);
    case Kind::Tabulated: return k < tab_->pmf.size() && tab_->pmf[k] > 0.0;
  }
  return false;
}

double OffspringDistribution::cdf(std::uint64_t k) const {
  if (kind_ == Kind::Deterministic) return k >= d_ ? 1.0 : 0.0;
  if (k < tab_->cdf.size()) return tab_->cdf[k];
  if (kind_ == Kind::PowerLaw) return 1.0 - zeta_tail(b_, static_cast<double>(k)) / norm_;
  return 1.0;
}

double OffspringDistribution::mean() const {
  if (kind_ == Kind::Deterministic) return static_cast<double>(d_);
  if (kind_ == Kind::PowerLaw && b_ <= 2.0) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  const auto& pmf = tab_->pmf;
  for (std::size_t k = 0; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
  if (kind_ == Kind::PowerLaw) m += zeta_tail(b_ - 1.0, static_cast<double>(pmf.size() - 1)) / norm_;
  return m;
}

double OffspringDistribution::mean_truncated(std::uint64_t L) const {
  if (kind_ == Kind::Deterministic) return d_ < L ? static_cast<double>(d_) : 0.0;
  double m = 0.0;
  for (std::uint64_t k = 0; k < L; ++k) m += static_cast<double>(k) * pmf(k);
  return m;
}

std::uint64_t OffspringDistribution::sample_u(double u) const {
  if (kind_ == Kind::Deterministic) return d_;
  const auto& cdf = tab_->cdf;
  if (u < cdf.back() || kind_ != Kind::PowerLaw) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<std::uint64_t>(it - cdf.begin());
  }
  const double K = static_cast<double>(cdf.size() - 1);
  const double w = std::max((1.0 - u) / tail_mass_, 1e-300);
  const double x = (K + 0.5) * std::pow(std::min(w, 1.0), -1.0 / (b_ - 1.0)) - 0.5;
  const double c = std::min(std::max(std::floor(x + 0.5), K + 1.0), 9.0e18);
  return static_cast<std::uint64_t>(c);
}

std::uint64_t OffspringDistribution::sample(Rng& rng) const { return sample_u(rng.uniform()); }

// ---------------------------------------------------------------- GraphView

VertexId GraphView::add_vertex(std::uint32_t degree, std::uint64_t key, VertexId parent, std::uint64_t depth,
                               std::uint64_t offspring) {
  const auto id = static_cast<VertexId>(deg_.size());
  deg_.push_back(degree);
  adj_.emplace_back();
  key_.push_back(key);
  if (lazy_) {
    mat_.push_back(0);
    parent_.push_back(parent);
    depth_.push_back(depth);
    off_.push_back(offspring);
  }
  return id;
}

EdgeId GraphView::add_edge(VertexId u, VertexId v, std::uint64_t key) {
  const auto e = static_cast<EdgeId>(ends_.size());
  ends_.emplace_back(u, v);
  ekey_.push_back(key);
  adj_[u].push_back({v, e});
  adj_[v].push_back({u, e});
  return e;
}

std::uint64_t GraphView::offspring(VertexId v) const {
  if (lazy_) return off_[v];
  return children(v).size();
}

std::vector<VertexId> GraphView::children(VertexId v) const {
  std::vector<VertexId> out;
  const VertexId par = parent(v);
  for (const auto& a : adj_[v])
    if (a.to != par) out.push_back(a.to);
  return out;
}

bool GraphView::materialize(VertexId v) {
  if (!lazy_ || mat_[v]) return true;
  const std::uint64_t k = off_[v];
  if (k > 0 && (deg_.size() + k > caps_.max_vertices || depth_[v] + 1 > caps_.max_depth)) {
    truncated_ = true;
    return false;
  }
  mat_[v] = 1;
  const std::uint64_t pkey = key_[v];
  const std::uint64_t d = depth_[v] + 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t ckey = hash_combine(pkey, i + 1);
    Rng r(hash_combine(ckey, 0x6f6666ULL));
    const std::uint64_t z = dist_->sample(r);
    if (z + 1 > 0xffffffffULL) throw GraphError("vertex degree exceeds 32-bit range");
    const VertexId c = add_vertex(static_cast<std::uint32_t>(z + 1), ckey, v, d, z);
    add_edge(v, c, ckey);
  }
  return true;
}

void GraphView::materialize_all(std::uint64_t depth) {
  for (VertexId v = 0; v < deg_.size(); ++v)
    if (this->depth(v) < depth && !materialize(v)) return;
}

void GraphView::write(std::ostream& os) const {
  os << "#vertices " << num_vertices() << "\n";
  for (const auto& [u, v] : ends_) os << u << " " << v << "\n";
}

GraphView build_finite(const std::vector<std::pair<VertexId, VertexId>>& edges,
                       const std::vector<std::uint32_t>& degree_override) {
  VertexId n = 0;
  for (const auto& [u, v] : edges) n = std::max({n, u + 1, v + 1});
  if (!degree_override.empty()) {
    if (degree_override.size() < n) throw GraphError("degree override shorter than vertex count");
    n = static_cast<VertexId>(degree_override.size());
  }
  if (n == 0) n = 1;
  GraphView g;
  for (VertexId v = 0; v < n; ++v) g.add_vertex(0, hash_combine(0xf17e0000ULL, v), kNoVertex, 0, 0);
  std::set<std::pair<VertexId, VertexId>> seen;
  for (const auto& [u, v] : edges) {
    if (u == v) throw GraphError("self-loop at vertex " + std::to_string(u));
    const auto key = std::minmax(u, v);
    if (!seen.insert(key).second)
      throw GraphError("duplicate edge " + std::to_string(key.first) + " " + std::to_string(key.second));
    g.add_edge(u, v, hash_combine(0xed6e0000ULL, key.first, key.second));
  }
  // connectivity
  std::vector<std::uint8_t> vis(n, 0);
  std::vector<VertexId> stack{0};
  vis[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const VertexId x = stack.back();
    stack.pop_back();
    for (const auto& a : g.adj_[x])
      if (!vis[a.to]) {
        vis[a.to] = 1;
        ++reached;
        stack.push_back(a.to);
      }
  }
  if (reached != n)
    throw GraphError("graph is disconnected: " + std::to_string(reached) + " of " + std::to_string(n) +
                     " vertices reachable from 0");
  for (VertexId v = 0; v < n; ++v) {
    const auto a = static_cast<std::uint32_t>(g.adj_[v].size());
    if (!degree_override.empty()) {
      if (degree_override[v] < a)
        throw GraphError("degree override below adjacency size at vertex " + std::to_string(v));
      g.deg_[v] = degree_override[v];
    } else {
      g.deg_[v] = a;
    }
  }
  return g;
}

GraphView grow_bgw(const OffspringDistribution& dist, std::uint64_t seed, Caps caps,
                   std::optional<std::uint64_t> root_offspring) {
  GraphView g;
  g.lazy_ = true;
  g.dist_ = std::make_shared<const OffspringDistribution>(dist);
  g.seed_ = seed;
  g.caps_ = caps;
  g.forced_root_ = root_offspring;
  const std::uint64_t rkey = hash_combine(seed, 0x526f6f74ULL);
  std::uint64_t z;
  if (root_offspring) {
    z = *root_offspring;
  } else {
    Rng r(hash_combine(rkey, 0x6f6666ULL));
    z = dist.sample(r);
  }
  if (z > 0xffffffffULL) throw GraphError("root degree exceeds 32-bit range");
  g.add_vertex(static_cast<std::uint32_t>(z), rkey, kNoVertex, 0, z);
  g.materialize(0);
  return g;
}

GraphView conditioned_root_degree(const GraphView& g, std::uint64_t N) {
  if (!g.lazy() || g.distribution() == nullptr) throw GraphError("conditioning requires a BGW tree");
  // a degenerate law only fixes the offspring of non-root vertices
  if (g.distribution()->kind() != OffspringDistribution::Kind::Deterministic && !g.distribution()->in_support(N))
    throw GraphError("root degree " + std::to_string(N) + " outside the offspring support");
  return grow_bgw(*g.distribution(), g.tree_seed(), g.caps(), N);
}

std::vector<VertexId> bounded_degree_children(const GraphView& g, VertexId x, std::uint64_t L) {
  std::vector<VertexId> out;
  for (VertexId c : g.children(x))
    if (g.degree(c) <= L) out.push_back(c);
  return out;
}

GraphView induced_star(const GraphView& g, VertexId x, std::uint64_t L) {
  const auto kids = bounded_degree_children(g, x, L);
  std::vector<std::pair<VertexId, VertexId>> edges;
  std::vector<std::uint32_t> deg{std::max<std::uint32_t>(g.degree(x), static_cast<std::uint32_t>(kids.size()))};
  for (std::size_t i = 0; i < kids.size(); ++i) {
    edges.emplace_back(0, static_cast<VertexId>(i + 1));
    deg.push_back(g.degree(kids[i]));
  }
  return build_finite(edges, deg);
}

GraphView path_with_leaves(const std::vector<std::uint32_t>& degrees) {
  if (degrees.size() < 2) throw GraphError("path needs at least one edge");
  const auto n = static_cast<VertexId>(degrees.size());
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  VertexId next = n;
  for (VertexId i = 0; i < n; ++i) {
    const std::uint32_t path_deg = (i == 0 || i + 1 == n) ? 1 : 2;
    if (degrees[i] < path_deg) throw GraphError("prescribed degree below path degree");
    for (std::uint32_t j = path_deg; j < degrees[i]; ++j) edges.emplace_back(i, next++);
  }
  return build_finite(edges);
}

GraphView read_graph(std::istream& is) {
  std::string line;
  long long n = -1;
  std::vector<std::pair<VertexId, VertexId>> edges;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    if (n < 0) {
      std::string tag;
      ls >> tag >> n;
      if (tag != "#vertices" || !ls || n <= 0) throw GraphError("line 1: expected header '#vertices N'");
      continue;
    }
    if (line[line.find_first_not_of(" \t")] == '#') continue;
    long long u, v;
    if (!(ls >> u >> v) || u < 0 || v < 0 || u >= n || v >= n)
      throw GraphError("line " + std::to_string(lineno) + ": expected 'u v' with 0 <= u,v < " + std::to_string(n));
    edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
  }
  if (n < 0) throw GraphError("missing '#vertices N' header");
  VertexId maxv = 0;
  for (const auto& [u, v] : edges) maxv = std::max({maxv, u + 1, v + 1});
  if (static_cast<long long>(maxv) < n && n > 1) throw GraphError("graph is disconnected: isolated vertices");
  return build_finite(edges);
}

GraphView read_graph_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw GraphError("cannot open graph file " + path);
  return read_graph(f);
}

GraphView complete_graph(std::uint32_t n) {
  std::vector<std::pair<VertexId, VertexId>> e;
  for (VertexId i = 0; i < n; ++i)
    for (VertexId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return build_finite(e);
}

GraphView star_graph(std::uint32_t leaves) {
  std::vector<std::pair<VertexId, VertexId>> e;
  for (VertexId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return build_finite(e);
}

GraphView path_graph(std::uint32_t vertices) {
  std::vector<std::pair<VertexId, VertexId>> e;
  for (VertexId i = 0; i + 1 < vertices; ++i) e.emplace_back(i, i + 1);
  return build_finite(e);
}

GraphView regular_tree(std::uint32_t degree, std::uint32_t depth) {
  std::vector<std::pair<VertexId, VertexId>> e;
  std::vector<VertexId> level{0};
  VertexId next = 1;
  for (std::uint32_t d = 0; d < depth; ++d) {
    std::vector<VertexId> nl;
    for (VertexId x : level) {
      const std::uint32_t k = (x == 0) ? degree : degree - 1;
      for (std::uint32_t i = 0; i < k; ++i) {
        e.emplace_back(x, next);
        nl.push_back(next++);
      }
    }
    level.swap(nl);
  }
  return build_finite(e);
}

GraphView random_tree(std::uint32_t n, Rng& rng) {
  std::vector<std::pair<VertexId, VertexId>> e;
  for (VertexId i = 1; i < n; ++i) e.emplace_back(static_cast<VertexId>(rng() % i), i);
  return build_finite(e);
}

GraphView random_connected(std::uint32_t n, double extra_edge_prob, Rng& rng) {
  std::vector<std::pair<VertexId, VertexId>> e;
  std::set<std::pair<VertexId, VertexId>> s;
  for (VertexId i = 1; i < n; ++i) {
    const auto p = static_cast<VertexId>(rng() % i);
    e.emplace_back(p, i);
    s.insert({p, i});
  }
  for (VertexId i = 0; i < n; ++i)
    for (VertexId j = i + 1; j < n; ++j)
      if (!s.count({i, j}) && rng.bernoulli(extra_edge_prob)) e.emplace_back(i, j);
  return build_finite(e);
}

}  // namespace cpdg::graph
