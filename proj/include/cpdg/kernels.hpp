#pragma once
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cpdg/graph.hpp"
#include "cpdg/rng.hpp"

namespace cpdg::kernels {

struct KernelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Overrides for p on selected degree pairs; other pairs fall back to the σ-kernel.
struct CustomP {
  std::function<double(std::uint64_t, std::uint64_t)> fn;
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> table;  // keyed (min, max)
  std::string label;
};

struct KernelSpec {
  enum class Mode { Sigma, Custom };
  double alpha = 0.0;
  double sigma = 0.0;
  double kappa = 1.0;
  double eta = 0.0;
  double nu = 1.0;
  Mode mode = Mode::Sigma;
  std::shared_ptr<const CustomP> custom;

  static KernelSpec sigma_kernel(double alpha, double sigma, double kappa, double eta = 0.0, double nu = 1.0);
  static KernelSpec constant_p(double p, double eta = 0.0, double nu = 1.0);
  static KernelSpec with_function(std::function<double(std::uint64_t, std::uint64_t)> fn, std::string label,
                                  double eta = 0.0, double nu = 1.0);
  // "n m p" lines; pairs not listed use the σ-kernel of `base`
  static KernelSpec with_table_file(const std::string& path, const KernelSpec& base);
  static KernelSpec with_table(std::map<std::pair<std::uint64_t, std::uint64_t>, double> table,
                               const KernelSpec& base);

  void validate() const;  // throws KernelError with all violations
  double p(std::uint64_t dx, std::uint64_t dy) const;
  double v(std::uint64_t dx, std::uint64_t dy) const;
  std::string describe() const;
};

double p_value(const KernelSpec& s, std::uint64_t dx, std::uint64_t dy);
double v_value(const KernelSpec& s, std::uint64_t dx, std::uint64_t dy);

struct Envelope {
  double kappa1 = 0, kappa2 = 0, nu1 = 0, nu2 = 0;
  bool violation = false;
  std::string message;
};
// Tightest κ₁,κ₂,ν₁,ν₂ over the sampled n >= m; `max_spread` bounds κ₂/κ₁ and ν₂/ν₁.
Envelope envelope_check(const KernelSpec& s, std::uint64_t m, const std::vector<std::uint64_t>& n_range,
                        double max_spread = 1e6);
// Geometric grid m..n_max used where no explicit range is given.
std::vector<std::uint64_t> default_n_range(std::uint64_t m, std::uint64_t n_max);

struct PercolatedOffspring {
  graph::OffspringDistribution base;
  KernelSpec kernel;
};

std::uint64_t sample_zeta_p(const PercolatedOffspring& pd, Rng& rng);

struct TailEstimate {
  double exponent = 0.0;   // pmf exponent τ in P(X = k) ≍ k^{-τ}
  std::size_t tail_points = 0;
  double threshold = 0.0;  // (k+1)-th largest sample
  double span = 0.0;       // max / threshold
  bool reliable = false;
  std::string reason;
};
// Hill estimator on the top 1% (at least 100) order statistics.
TailEstimate tail_exponent_estimate(std::vector<double> samples);
TailEstimate tail_exponent_estimate(const std::vector<std::uint64_t>& samples);

}  // namespace cpdg::kernels
