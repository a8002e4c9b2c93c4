#pragma once
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpdg/closedform.hpp"
#include "cpdg/engine.hpp"
#include "cpdg/graph.hpp"
#include "cpdg/kernels.hpp"
#include "cpdg/lyapunov.hpp"

namespace cpdg::config {

struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> v);
  std::vector<std::string> violations;
};

struct OffspringSpec {
  std::string kind = "geometric";  // power_law | stretched | geometric | deterministic | tabulated
  double b = 2.5, beta = 0.5, scale = 1.0, q = 0.2;
  std::uint64_t k0 = 1, d = 2;
  std::vector<double> weights;
  graph::OffspringDistribution build() const;
};

struct GraphSpec {
  std::string type = "complete";  // file | bgw | star | complete | star_graph | path | regular_tree
  std::string path;
  std::uint32_t n = 2, degree = 3, depth = 3;
  OffspringSpec offspring;
  std::uint64_t N = 100, L = 6;  // star
  std::uint64_t tree_seed = 1;
  graph::Caps caps;
};

struct KernelBlock {
  double alpha = 0.5, sigma = 1.0, kappa = 1.0, eta = 0.0, nu = 1.0;
  std::optional<double> constant_p;
  std::string table;  // "n m p" file
  kernels::KernelSpec build() const;
};

struct StarBlock {
  std::string experiment = "survival";  // survival | stable
  std::vector<std::uint64_t> N{50, 100, 200, 400};
  std::uint64_t L = 6;
  std::uint64_t max_windows = 100000;
  double alpha_level = 0.01;
};

struct PathBlock {
  std::vector<std::uint64_t> r{1, 2, 3, 4, 5};
  std::uint32_t degree = 3;
};

struct PhaseBlock {
  std::vector<double> alpha{0.3}, eta{0.1};
  double sigma = 1.0;
  std::string tail = "power";  // power | stretched
  double param = 2.5;
  bool zeta_zero = false;
};

struct EdgeLawBlock {
  double v = 1.0, p = 1.0;
  std::vector<double> t{0.5, 1.0, 2.0};
  std::uint64_t replicas = 0;  // 0: closed forms only
};

struct OracleBlock {
  double t = 1.0;
};

struct CheckBlock {
  std::string weight = "linear";  // linear | power | one
  double beta = 1.0;
  std::vector<double> grid;  // non-empty: run the supermartingale trace
  std::uint64_t replicas = 0;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  GraphSpec graph;
  KernelBlock kernel;
  std::vector<double> lambda{1.0};
  double horizon = 10.0;
  std::uint64_t replicas = 1000;
  std::uint64_t max_infected = 1000000;
  std::vector<graph::VertexId> init{0};
  std::string variant = "cpdg";
  StarBlock star;
  PathBlock path;
  PhaseBlock phase;
  EdgeLawBlock edge_law;
  OracleBlock oracle;
  CheckBlock check;

  std::string canonical;  // canonical JSON of the fully defaulted config
  std::uint64_t hash = 0;
  std::string hash_hex() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string canonicalize(const ExperimentConfig& c);
std::uint64_t fnv1a(const std::string& s);

graph::GraphView build_graph(const GraphSpec& g);

}  // namespace cpdg::config
