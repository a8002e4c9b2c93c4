#pragma once
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "cpdg/graph.hpp"
#include "cpdg/kernels.hpp"

namespace cpdg::oracle {

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// State index: bits 0..V-1 infected set C, bits V..V+E-1 open edges B.
struct ExactModel {
  std::uint32_t V = 0, E = 0;
  std::size_t states = 0;
  double lambda = 0;
  std::vector<double> p, v;  // per edge
  std::vector<std::uint32_t> ends_u, ends_v;
  // CSR off-diagonal rates
  std::vector<std::size_t> row;
  std::vector<std::uint32_t> col;
  std::vector<double> rate;
  std::vector<double> exit;  // total outgoing rate per state

  std::uint32_t c_mask(std::size_t s) const { return static_cast<std::uint32_t>(s & ((1u << V) - 1u)); }
  std::uint32_t b_mask(std::size_t s) const { return static_cast<std::uint32_t>(s >> V); }
  std::size_t index(std::uint32_t c, std::uint32_t b) const { return static_cast<std::size_t>(c) | (std::size_t{b} << V); }
};

inline constexpr std::size_t kMaxStates = std::size_t{1} << 20;

ExactModel build_exact(const graph::GraphView& g, const kernels::KernelSpec& kernel, double lambda);

// Stationary background × infected set c0.
std::vector<double> initial_distribution(const ExactModel& m, std::uint32_t c0);
std::vector<double> transient(const ExactModel& m, const std::vector<double>& init, double t, double tol = 1e-12);
double transient_prob(const ExactModel& m, const std::vector<double>& init, double t,
                      const std::function<bool(std::uint32_t c, std::uint32_t b)>& event);

struct ExtinctionStats {
  double p_extinct = 0;
  double mean_time = 0;
  std::size_t transient_states = 0;
};
ExtinctionStats extinction_stats(const ExactModel& m, const std::vector<double>& init);

}  // namespace cpdg::oracle
