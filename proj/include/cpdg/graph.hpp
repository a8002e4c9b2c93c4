#pragma once
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cpdg/rng.hpp"

namespace cpdg::graph {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;
inline constexpr VertexId kNoVertex = 0xffffffffu;

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class OffspringDistribution {
 public:
  enum class Kind { PowerLaw, StretchedExponential, Geometric, Deterministic, Tabulated };

  // P(k) ∝ k^{-b}, k >= k0 (k0 = 0 treated as starting at 1 for the weight, P(0) = 0 weightless)
  static OffspringDistribution power_law(double b, std::uint64_t k0 = 1);
  // P(k) ∝ exp(-(k/scale)^beta), k >= 0
  static OffspringDistribution stretched_exponential(double beta, double scale = 1.0);
  // P(k) = q (1-q)^k, k >= 0
  static OffspringDistribution geometric(double q);
  static OffspringDistribution deterministic(std::uint64_t d);
  static OffspringDistribution tabulated(std::vector<double> weights);

  Kind kind() const { return kind_; }
  std::string describe() const;

  double pmf(std::uint64_t k) const;
  double cdf(std::uint64_t k) const;  // P(ζ <= k)
  double mean() const;                // +inf when infinite
  bool mean_finite() const { return std::isfinite(mean()); }
  double mean_truncated(std::uint64_t L) const;  // E[ζ 1{ζ < L}]
  std::uint64_t sample(Rng& rng) const;
  std::uint64_t sample_u(double u) const;  // inverse cdf at u in [0,1)
  bool in_support(std::uint64_t k) const;  // mathematical support, not the table
  bool truncated_mass() const { return truncated_; }

  double param_b() const { return b_; }
  double param_beta() const { return beta_; }
  double param_scale() const { return scale_; }
  double param_q() const { return q_; }
  std::uint64_t param_k0() const { return k0_; }
  std::uint64_t param_d() const { return d_; }

 private:
  void build_table(const std::vector<double>& weights);
  Kind kind_ = Kind::Deterministic;
  double b_ = 0, beta_ = 0, scale_ = 1, q_ = 0;
  std::uint64_t k0_ = 0, d_ = 0;
  struct Table {
    std::vector<double> pmf, cdf;
  };
  std::shared_ptr<const Table> tab_;
  // power-law tail beyond the table: mass and normaliser
  double tail_mass_ = 0.0, norm_ = 1.0;
  bool truncated_ = false;
};

struct Caps {
  std::uint64_t max_vertices = 1000000;
  std::uint64_t max_depth = 10000;
};

struct Adj {
  VertexId to;
  EdgeId edge;
};

class GraphView {
 public:
  GraphView() = default;

  std::size_t num_vertices() const { return deg_.size(); }
  std::size_t num_edges() const { return ends_.size(); }
  std::uint32_t degree(VertexId v) const { return deg_[v]; }
  const std::vector<Adj>& neighbors(VertexId v) const { return adj_[v]; }
  std::pair<VertexId, VertexId> endpoints(EdgeId e) const { return ends_[e]; }
  VertexId other(EdgeId e, VertexId v) const { return ends_[e].first == v ? ends_[e].second : ends_[e].first; }
  std::uint64_t vertex_key(VertexId v) const { return key_[v]; }
  std::uint64_t edge_key(EdgeId e) const { return ekey_[e]; }

  bool lazy() const { return lazy_; }
  bool truncated() const { return truncated_; }
  bool materialized(VertexId v) const { return !lazy_ || mat_[v]; }
  // Generates the children of v; false (and marks truncated) if a cap forbids it.
  bool materialize(VertexId v);
  void materialize_all(std::uint64_t depth);  // convenience for finite balls

  VertexId parent(VertexId v) const { return parent_.empty() ? kNoVertex : parent_[v]; }
  std::uint64_t depth(VertexId v) const { return depth_.empty() ? 0 : depth_[v]; }
  std::uint64_t offspring(VertexId v) const;
  std::vector<VertexId> children(VertexId v) const;
  const Caps& caps() const { return caps_; }
  std::uint64_t tree_seed() const { return seed_; }
  const OffspringDistribution* distribution() const { return dist_.get(); }
  std::optional<std::uint64_t> forced_root() const { return forced_root_; }

  void write(std::ostream& os) const;

  friend GraphView build_finite(const std::vector<std::pair<VertexId, VertexId>>&,
                                const std::vector<std::uint32_t>&);
  friend GraphView grow_bgw(const OffspringDistribution&, std::uint64_t, Caps, std::optional<std::uint64_t>);

 private:
  VertexId add_vertex(std::uint32_t degree, std::uint64_t key, VertexId parent, std::uint64_t depth,
                      std::uint64_t offspring);
  EdgeId add_edge(VertexId u, VertexId v, std::uint64_t key);

  std::vector<std::uint32_t> deg_;
  std::vector<std::vector<Adj>> adj_;
  std::vector<std::pair<VertexId, VertexId>> ends_;
  std::vector<std::uint64_t> key_, ekey_;
  // lazy tree bookkeeping
  bool lazy_ = false, truncated_ = false;
  std::vector<std::uint8_t> mat_;
  std::vector<VertexId> parent_;
  std::vector<std::uint64_t> depth_, off_;
  std::shared_ptr<const OffspringDistribution> dist_;
  std::uint64_t seed_ = 0;
  Caps caps_;
  std::optional<std::uint64_t> forced_root_;
};

// degree_override: optional frozen degrees (each >= adjacency size); empty = use adjacency
GraphView build_finite(const std::vector<std::pair<VertexId, VertexId>>& edges,
                       const std::vector<std::uint32_t>& degree_override = {});
GraphView grow_bgw(const OffspringDistribution& dist, std::uint64_t seed, Caps caps = {},
                   std::optional<std::uint64_t> root_offspring = std::nullopt);
GraphView conditioned_root_degree(const GraphView& g, std::uint64_t N);
std::vector<VertexId> bounded_degree_children(const GraphView& g, VertexId x, std::uint64_t L);

// Star ρ ∪ N_ρ as a finite graph; children keep their frozen tree degrees.
GraphView induced_star(const GraphView& g, VertexId x, std::uint64_t L);
// Path x_0..x_r with dummy leaves so every path vertex has the prescribed degree.
GraphView path_with_leaves(const std::vector<std::uint32_t>& degrees);

GraphView read_graph(std::istream& is);
GraphView read_graph_file(const std::string& path);

// Named small graphs
GraphView complete_graph(std::uint32_t n);
GraphView star_graph(std::uint32_t leaves);
GraphView path_graph(std::uint32_t vertices);
GraphView regular_tree(std::uint32_t degree, std::uint32_t depth);
GraphView random_tree(std::uint32_t n, Rng& rng);
GraphView random_connected(std::uint32_t n, double extra_edge_prob, Rng& rng);

}  // namespace cpdg::graph
