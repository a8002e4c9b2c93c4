#pragma once
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpdg/engine.hpp"
#include "cpdg/graph.hpp"
#include "cpdg/kernels.hpp"

namespace cpdg::lyapunov {

struct LyapunovError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WeightFunction {
  enum class Kind { Linear, Power, Custom } kind = Kind::Linear;
  double beta = 1.0;
  std::map<std::uint32_t, double> table;  // Custom: degree -> W

  static WeightFunction linear() { return {}; }
  static WeightFunction power(double beta) { return {Kind::Power, beta, {}}; }
  static WeightFunction constant_one() { return {Kind::Power, 0.0, {}}; }
  static WeightFunction custom(std::map<std::uint32_t, double> t) { return {Kind::Custom, 1.0, std::move(t)}; }
  double operator()(std::uint32_t d) const;
  std::string describe() const;
};

struct LyapunovReport {
  double K = 0;
  double K0 = 0, K1 = 0;  // the two condition ratios separately
  double v_min = 0;
  double lambda = 0;
  double theta = 0;
  double lambda_star = 0;
  std::size_t vertices_checked = 0;
  bool partial = false;  // lazily grown tree: only the materialized ball was checked
};

double theta(double lambda, double K, double v_min);
double lambda_star(double K, double v_min);

LyapunovReport check_conditions(const graph::GraphView& g, const kernels::KernelSpec& kernel, const WeightFunction& W,
                                double lambda = 0.0);

// f evaluated on a wait-and-see layer of a running simulator.
double f_value(const engine::Simulator& sim, std::size_t layer, const WeightFunction& W);

struct TracePoint {
  double t = 0;
  double mean_f = 0, se_f = 0;
  double bound = 0;  // f(X0) e^{ϑt}
  bool ok = true;
};
struct SupermartingaleTrace {
  LyapunovReport report;
  double f0 = 0;
  std::vector<TracePoint> points;
  bool asserted = false;  // ϑ < 0
  bool pass = true;
  std::uint64_t f_below_count_violations = 0;  // f < |C| observed
};
SupermartingaleTrace supermartingale_trace(const graph::GraphView& g, const kernels::KernelSpec& kernel, double lambda,
                                           const WeightFunction& W, const std::vector<graph::VertexId>& init,
                                           const std::vector<double>& grid, std::uint64_t replicas,
                                           std::uint64_t seed, unsigned threads = 1);

}  // namespace cpdg::lyapunov
