#include "cpdg/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>

namespace cpdg::stats {

Interval wilson(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n), ph = static_cast<double>(k) / nn, z2 = z * z;
  const double den = 1.0 + z2 / nn;
  const double mid = (ph + z2 / (2 * nn)) / den;
  const double half = z * std::sqrt(ph * (1 - ph) / nn + z2 / (4 * nn * nn)) / den;
  // the endpoints are exact at k = 0 and k = n
  return {k == 0 ? 0.0 : std::max(0.0, mid - half), k == n ? 1.0 : std::min(1.0, mid + half)};
}

MeanSE mean_se(const std::vector<double>& x) {
  MeanSE r;
  r.n = x.size();
  if (x.empty()) return r;
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s2 = 0.0;
  for (double v : x) s2 += (v - m) * (v - m);
  r.mean = m;
  r.var = x.size() > 1 ? s2 / static_cast<double>(x.size() - 1) : 0.0;
  r.se = std::sqrt(r.var / static_cast<double>(x.size()));
  return r;
}

double prop_se(double p, std::uint64_t n) { return n ? std::sqrt(p * (1 - p) / static_cast<double>(n)) : 0.0; }

double median(std::vector<double> x) {
  if (x.empty()) throw std::invalid_argument("median of empty sample");
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

MannWhitney mann_whitney_greater(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n1 = x.size(), n2 = y.size();
  if (!n1 || !n2) throw std::invalid_argument("Mann-Whitney needs two non-empty samples");
  std::vector<std::pair<double, int>> all;
  all.reserve(n1 + n2);
  for (double v : x) all.push_back({v, 0});
  for (double v : y) all.push_back({v, 1});
  std::sort(all.begin(), all.end());
  double rank_y = 0.0, tie = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    const double t = static_cast<double>(j - i);
    tie += t * t * t - t;
    for (std::size_t k = i; k < j; ++k)
      if (all[k].second == 1) rank_y += r;
    i = j;
  }
  const double a = static_cast<double>(n1), b = static_cast<double>(n2), N = a + b;
  MannWhitney r;
  r.U = rank_y - b * (b + 1) / 2.0;
  const double mu = a * b / 2.0;
  const double sd = std::sqrt(a * b / 12.0 * ((N + 1) - tie / (N * (N - 1))));
  r.z = sd > 0 ? (r.U - mu - 0.5) / sd : 0.0;
  boost::math::normal_distribution<> nd;
  r.p_value = sd > 0 ? boost::math::cdf(boost::math::complement(nd, r.z)) : 1.0;
  return r;
}

KS ks_two_sample(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("KS needs two non-empty samples");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    D = std::max(D, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  KS r;
  r.D = D;
  const double ne = n * m / (n + m);
  const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * D;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
  r.p_value = std::clamp(lam < 1e-3 ? 1.0 : p, 0.0, 1.0);
  return r;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

}  // namespace cpdg::stats
