#include "cpdg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace cpdg::kernels {

KernelSpec KernelSpec::sigma_kernel(double alpha, double sigma, double kappa, double eta, double nu) {
  KernelSpec s;
  s.alpha = alpha;
  s.sigma = sigma;
  s.kappa = kappa;
  s.eta = eta;
  s.nu = nu;
  s.validate();
  return s;
}

KernelSpec KernelSpec::constant_p(double p, double eta, double nu) {
  if (!(p >= 0.0 && p <= 1.0)) throw KernelError("constant p must lie in [0,1]");
  std::ostringstream os;
  os.precision(17);
  os << "const(" << p << ")";
  return with_function([p](std::uint64_t, std::uint64_t) { return p; }, os.str(), eta, nu);
}

KernelSpec KernelSpec::with_function(std::function<double(std::uint64_t, std::uint64_t)> fn, std::string label,
                                     double eta, double nu) {
  KernelSpec s;
  s.eta = eta;
  s.nu = nu;
  s.mode = Mode::Custom;
  auto c = std::make_shared<CustomP>();
  c->fn = std::move(fn);
  c->label = std::move(label);
  s.custom = std::move(c);
  s.validate();
  return s;
}

KernelSpec KernelSpec::with_table(std::map<std::pair<std::uint64_t, std::uint64_t>, double> table,
                                  const KernelSpec& base) {
  KernelSpec s = base;
  s.mode = Mode::Custom;
  auto c = std::make_shared<CustomP>();
  for (const auto& [k, p] : table) {
    if (!(p >= 0.0 && p <= 1.0)) throw KernelError("custom table value outside [0,1]");
    if (k.first < 1 || k.second < 1) throw KernelError("custom table degrees must be >= 1");
    c->table[std::minmax(k.first, k.second)] = p;
  }
  c->label = "table(" + std::to_string(c->table.size()) + ")";
  s.custom = std::move(c);
  s.validate();
  return s;
}

KernelSpec KernelSpec::with_table_file(const std::string& path, const KernelSpec& base) {
  std::ifstream f(path);
  if (!f) throw KernelError("cannot open kernel table " + path);
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    std::istringstream ls(line);
    long long n, m;
    double p;
    if (!(ls >> n >> m >> p) || n < 1 || m < 1)
      throw KernelError(path + ":" + std::to_string(lineno) + ": expected 'n m p'");
    t[{static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m)}] = p;
  }
  return with_table(std::move(t), base);
}

void KernelSpec::validate() const {
  std::vector<std::string> errs;
  if (!(alpha >= 0.0)) errs.push_back("kernel.alpha must be >= 0");
  if (!(sigma >= 0.0 && sigma <= 1.0)) errs.push_back("kernel.sigma must lie in [0,1]");
  if (!(kappa > 0.0)) errs.push_back("kernel.kappa must be > 0");
  if (!std::isfinite(eta)) errs.push_back("kernel.eta must be finite");
  if (!(nu > 0.0)) errs.push_back("kernel.nu must be > 0");
  if (mode == Mode::Custom && !custom) errs.push_back("custom kernel without table or function");
  if (!errs.empty()) {
    std::string m;
    for (const auto& e : errs) m += (m.empty() ? "" : "; ") + e;
    throw KernelError(m);
  }
}

double KernelSpec::p(std::uint64_t dx, std::uint64_t dy) const {
  if (mode == Mode::Custom) {
    if (custom->fn) return custom->fn(dx, dy);
    auto it = custom->table.find(std::minmax(dx, dy));
    if (it != custom->table.end()) return it->second;
  }
  if (alpha == 0.0) return std::min(1.0, kappa);
  const double lo = static_cast<double>(std::min(dx, dy));
  const double hi = static_cast<double>(std::max(dx, dy));
  return std::min(1.0, kappa * std::pow(std::pow(lo, sigma) * hi, -alpha));
}

double KernelSpec::v(std::uint64_t dx, std::uint64_t dy) const {
  if (eta == 0.0) return nu;
  return nu * std::pow(static_cast<double>(std::max(dx, dy)), eta);
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (mode == Mode::Custom) os << "custom[" << custom->label << "] ";
  os << "alpha=" << alpha << " sigma=" << sigma << " kappa=" << kappa << " eta=" << eta << " nu=" << nu;
  return os.str();
}

double p_value(const KernelSpec& s, std::uint64_t dx, std::uint64_t dy) { return s.p(dx, dy); }
double v_value(const KernelSpec& s, std::uint64_t dx, std::uint64_t dy) { return s.v(dx, dy); }

std::vector<std::uint64_t> default_n_range(std::uint64_t m, std::uint64_t n_max) {
  std::vector<std::uint64_t> r;
  for (double x = static_cast<double>(m); x <= static_cast<double>(n_max); x = std::max(x + 1.0, x * 1.25))
    r.push_back(static_cast<std::uint64_t>(x));
  return r;
}

Envelope envelope_check(const KernelSpec& s, std::uint64_t m, const std::vector<std::uint64_t>& n_range,
                        double max_spread) {
  if (n_range.empty()) throw KernelError("envelope_check: empty n range");
  Envelope e;
  e.kappa1 = e.nu1 = std::numeric_limits<double>::infinity();
  std::uint64_t worst_n = 0;
  for (std::uint64_t n : n_range) {
    if (n < m) throw KernelError("envelope_check: n below m");
    const double nd = static_cast<double>(n);
    const double pr = s.p(n, m) * std::pow(nd, s.alpha);
    const double vr = s.v(n, m) / std::pow(nd, s.eta);
    if (pr < e.kappa1) {
      e.kappa1 = pr;
      worst_n = n;
    }
    e.kappa2 = std::max(e.kappa2, pr);
    e.nu1 = std::min(e.nu1, vr);
    e.nu2 = std::max(e.nu2, vr);
  }
  std::ostringstream msg;
  if (!(e.kappa1 > 0.0) || e.kappa2 > max_spread * e.kappa1) {
    e.violation = true;
    msg << "p(n," << m << ")·n^alpha ranges over [" << e.kappa1 << "," << e.kappa2 << "] (minimum at n=" << worst_n
        << ")";
  }
  if (!(e.nu1 > 0.0) || e.nu2 > max_spread * e.nu1) {
    e.violation = true;
    msg << (msg.tellp() > 0 ? "; " : "") << "v(n," << m << ")/n^eta ranges over [" << e.nu1 << "," << e.nu2 << "]";
  }
  e.message = msg.str();
  return e;
}

std::uint64_t sample_zeta_p(const PercolatedOffspring& pd, Rng& rng) {
  const std::uint64_t z = pd.base.sample(rng);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < z; ++i) {
    const std::uint64_t zi = pd.base.sample(rng);
    if (rng.uniform() < pd.kernel.p(z, std::max<std::uint64_t>(zi, 1))) ++hits;
  }
  return hits;
}

TailEstimate tail_exponent_estimate(std::vector<double> x) {
  TailEstimate t;
  const std::size_t n = x.size();
  if (n < 10000) {
    t.reason = "fewer than 1e4 samples";
    if (n < 101) return t;
  }
  const std::size_t k = std::max<std::size_t>(100, n / 100);
  if (k + 1 > n) {
    t.reason = "too few samples for 100 tail points";
    return t;
  }
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k), x.end(), std::greater<>());
  const double thr = x[k];
  t.tail_points = k;
  t.threshold = thr;
  if (!(thr > 0.0)) {
    t.reason = "tail threshold is zero";
    return t;
  }
  double s = 0.0, mx = thr;
  for (std::size_t i = 0; i < k; ++i) {
    s += std::log(x[i] / thr);
    mx = std::max(mx, x[i]);
  }
  t.span = mx / thr;
  if (!(s > 0.0)) {
    t.reason = "degenerate tail (all tail points equal the threshold)";
    return t;
  }
  t.exponent = 1.0 + static_cast<double>(k) / s;
  // a light tail keeps max/threshold near log(n)/log(100)
  const double light = std::log(static_cast<double>(n)) / std::log(100.0);
  if (t.reason.empty()) {
    if (t.span < std::max(5.0, 1.5 * light))
      t.reason = "tail span too short for a power law";
    else if (t.exponent > 20.0)
      t.reason = "tail exponent beyond 20";
    else
      t.reliable = true;
  }
  return t;
}

TailEstimate tail_exponent_estimate(const std::vector<std::uint64_t>& samples) {
  std::vector<double> x(samples.begin(), samples.end());
  return tail_exponent_estimate(std::move(x));
}

}  // namespace cpdg::kernels
