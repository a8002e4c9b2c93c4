#pragma once
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpdg/closedform.hpp"
#include "cpdg/engine.hpp"
#include "cpdg/graph.hpp"
#include "cpdg/kernels.hpp"
#include "cpdg/stats.hpp"

namespace cpdg::experiments {

struct ExperimentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------ survival
struct SurvivalEstimate {
  double lambda = 0;
  std::uint64_t replicas = 0;
  std::uint64_t extinct = 0;
  std::uint64_t alive_at_horizon = 0;
  std::uint64_t reinfected_root_late = 0;  // root re-entered C in (horizon/2, horizon]
  std::uint64_t censored = 0;              // cap or truncated tree
  stats::Interval wilson;                  // for alive_at_horizon / replicas
  stats::Interval wilson_strong;
  bool usable = true;
  std::vector<engine::TrajectoryRecord> records;  // index ordered
};

struct SurvivalSpec {
  double lambda = 1.0;
  double horizon = 10.0;
  std::uint64_t replicas = 1000;
  std::uint64_t max_infected = 1000000;
  std::vector<graph::VertexId> init{0};
  engine::Variant variant = engine::Variant::CPDG;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool keep_records = false;
};
SurvivalEstimate estimate_survival(const graph::GraphView& g, const kernels::KernelSpec& kernel,
                                   const SurvivalSpec& spec);

struct Bracket {
  double lo = 0, hi = 0;
  double p_lo = 0, p_hi = 0;
  std::size_t iterations = 0;
  bool bracketed = true;
  std::string diagnostic;
};
Bracket bracket_lambda(const graph::GraphView& g, const kernels::KernelSpec& kernel, SurvivalSpec spec, double target,
                       double lambda_lo, double lambda_hi, std::size_t iterations);

// -------------------------------------------------------------- edge law / sums
struct EdgeLawMC {
  double lambda = 0, v = 0, p = 0;
  std::uint64_t n = 0, successes = 0;
  std::vector<double> tail_times;
  std::vector<std::uint64_t> tail_counts;  // successes with transmission time > t
};
// Single closed edge {x,y}, x infected: does y get infected before x recovers?
EdgeLawMC edge_law_mc(double lambda, double v, double p, std::uint64_t n, std::uint64_t seed,
                      const std::vector<double>& tail_times = {0.5, 1.0, 2.0}, unsigned threads = 1);

double sample_geom_sum(double alpha, double beta, double q, Rng& rng);
struct LaplaceMC {
  double mean = 0, se = 0, exact = 0;
  std::uint64_t n = 0;
};
LaplaceMC laplace_mc(double alpha, double beta, double q, double theta, std::uint64_t n, std::uint64_t seed);

// ----------------------------------------------------------------------- stars
struct GoodNeighbourTrace {
  std::uint64_t windows = 0;  // k = 0..windows-1
  std::uint64_t min_good = 0;
  std::uint64_t argmin = 0;
  std::vector<std::uint32_t> counts;  // |G_k|, kept when requested
};
// |G_k| for k < windows on the star ρ ∪ N_ρ (vertex 0 the centre, degrees frozen).
GoodNeighbourTrace good_neighbours(const graph::GraphView& star, const kernels::KernelSpec& kernel, double T,
                                   std::uint64_t windows, std::uint64_t seed, bool keep_counts = false);

struct StableStarResult {
  std::uint64_t N = 0, L = 0, replicas = 0, stable = 0;
  closedform::StarConstants constants;
  double frequency = 0, se = 0;
  std::vector<std::uint64_t> min_good;  // per replica
};
StableStarResult stable_star_frequency(std::uint64_t N, std::uint64_t L, const kernels::KernelSpec& kernel,
                                       const graph::OffspringDistribution& dist, std::uint64_t replicas,
                                       std::uint64_t seed, unsigned threads = 1);

struct StarExperimentRecord {
  std::uint64_t N = 0, L = 0, replica = 0;
  double lambda = 0;
  std::uint64_t children = 0;  // |N_ρ|
  std::uint64_t good_neighbour_minimum = 0;
  std::uint64_t windows_checked = 0;
  bool stable_star = false;
  double extinction_time = 0;
  bool censored = false;
  std::uint64_t seed = 0;
};
struct StarScaling {
  std::vector<std::uint64_t> N;
  std::vector<double> median_time;
  std::vector<double> mw_p;  // one-sided Mann–Whitney p between N[i] and N[i+1]
  std::vector<closedform::StarConstants> constants;
  double slope = 0, r2 = 0;  // log median vs N^{1-α-2(η∨0)}
  bool increasing = true;
};
struct StarSurvivalSpec {
  std::vector<std::uint64_t> N;
  std::uint64_t L = 6;
  double lambda = 0.4;
  double horizon = 1e4;
  std::uint64_t replicas = 200;
  std::uint64_t max_windows = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double alpha_level = 0.01;
};
struct StarSurvivalResult {
  std::vector<StarExperimentRecord> records;
  StarScaling scaling;
};
StarSurvivalResult star_survival(const kernels::KernelSpec& kernel, const graph::OffspringDistribution& dist,
                                 const StarSurvivalSpec& spec);

// ----------------------------------------------------------------------- paths
struct PathPoint {
  std::size_t r = 0;
  std::uint64_t replicas = 0, hits = 0;
  double empirical = 0;
  stats::Interval wilson;
  double bound = 0;
  bool bound_ok = true;
};
struct PathResult {
  std::vector<PathPoint> points;
  double log_linear_r2 = 0;
  bool all_ok = true;
};
PathResult path_transmission(const std::vector<std::size_t>& rs, std::uint32_t degree, double lambda,
                             const kernels::KernelSpec& kernel, std::uint64_t replicas, std::uint64_t seed,
                             unsigned threads = 1);

// ---------------------------------------------------------- penalised limit
struct PenalisedRow {
  double nu = 0;
  double p_cpdg = 0, p_penalised = 0, p_lower = 0;
  double se_cpdg = 0, se_penalised = 0, se_lower = 0;
  bool lower_le_cpdg = true;
  double gap = 0;
};
struct PenalisedReport {
  std::vector<PenalisedRow> rows;
  bool ordering_ok = true;
};
PenalisedReport penalised_comparison(const graph::GraphView& g, const kernels::KernelSpec& kernel,
                                     const std::vector<double>& nus, SurvivalSpec spec);

}  // namespace cpdg::experiments
