#pragma once
#include <cstdint>
#include <vector>

namespace cpdg::stats {

struct Interval {
  double lo = 0, hi = 0;
};
Interval wilson(std::uint64_t successes, std::uint64_t n, double z = 1.959963984540054);

struct MeanSE {
  double mean = 0, se = 0, var = 0;
  std::size_t n = 0;
};
MeanSE mean_se(const std::vector<double>& x);
// standard error of a proportion
double prop_se(double p, std::uint64_t n);

double median(std::vector<double> x);

// One-sided Mann–Whitney U test of H1: values in y tend to exceed values in x.
// Normal approximation with tie correction.
struct MannWhitney {
  double U = 0, z = 0, p_value = 1;
};
MannWhitney mann_whitney_greater(const std::vector<double>& x, const std::vector<double>& y);

// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
struct KS {
  double D = 0, p_value = 1;
};
KS ks_two_sample(std::vector<double> x, std::vector<double> y);

struct LinearFit {
  double slope = 0, intercept = 0, r2 = 0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cpdg::stats
