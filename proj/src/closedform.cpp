#include "cpdg/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpdg::closedform {

double bg_transition(double p, double v, bool open_now, double s) {
  if (s < 0.0) throw ClosedFormError("bg_transition: negative elapsed time");
  const double stay = std::exp(-v * s);
  return open_now ? p + (1.0 - p) * stay : p * (1.0 - stay);
}

EdgeLaw make_edge_law(double lambda, double v, double p) {
  EdgeLaw e{lambda, v, p, 0, 0};
  const double h = 0.5 * (lambda + v);
  const double disc = std::max(0.0, h * h - lambda * v * p);
  const double sq = std::sqrt(disc);
  e.a = h + sq;
  e.b = e.a > 0.0 ? lambda * v * p / e.a : 0.0;
  return e;
}

double transmission_prob(double lambda, double v, double p) {
  const double x = lambda * v * p;
  return x / (lambda + v + x + 1.0);
}

double transmission_time_tail(const EdgeLaw& law, double t) {
  if (t <= 0.0) return 1.0;
  const double ra = law.a + 1.0, rb = law.b + 1.0;
  if (std::abs(ra - rb) < 1e-6 * ra) {
    const double r = 0.5 * (ra + rb);
    return (1.0 + r * t) * std::exp(-r * t);
  }
  return (rb / (rb - ra)) * std::exp(-ra * t) + (ra / (ra - rb)) * std::exp(-rb * t);
}

double transmission_time_mean(const EdgeLaw& law) { return 1.0 / (law.a + 1.0) + 1.0 / (law.b + 1.0); }

double geom_exp_laplace(double alpha, double beta, double q, double theta) {
  const double k = q * alpha * beta;
  return k / (theta * theta + theta * (alpha + beta) + k);
}

GeomSumParams transmission_geom_params(double lambda, double v, double p) {
  return {p * v, (1.0 - p) * v + lambda, lambda / (lambda + (1.0 - p) * v)};
}

double lower_bound_rate(double lambda, double v, double p) {
  const double s = lambda + v;
  const double disc = std::max(0.0, s * s - 4.0 * lambda * v * p);
  // smaller root, written without cancellation
  return 2.0 * lambda * v * p / (s + std::sqrt(disc));
}

double two_state_hit_prob(double lambda, double M, double t) {
  const double r = lambda * M;
  return r / (r + 1.0) * (1.0 - std::exp(-(r + 1.0) * t));
}

double edge_factor(double lambda, double v, double p) { return transmission_prob(lambda, v, p); }

PathBound path_lower_bound(const std::vector<std::uint32_t>& degrees, double lambda,
                           const kernels::KernelSpec& kernel) {
  if (degrees.size() < 2) throw ClosedFormError("path_lower_bound: empty path");
  PathBound b;
  b.r = degrees.size() - 1;
  b.product = 1.0;
  for (std::size_t i = 1; i < degrees.size(); ++i)
    b.product *= edge_factor(lambda, kernel.v(degrees[i - 1], degrees[i]), kernel.p(degrees[i - 1], degrees[i]));
  b.bound = (1.0 - std::exp(-kGamma * static_cast<double>(b.r))) * b.product;
  return b;
}

EnvelopeConsts star_envelope(const kernels::KernelSpec& kernel, std::uint64_t N, std::uint64_t L) {
  EnvelopeConsts e{std::numeric_limits<double>::infinity(), 0.0, std::numeric_limits<double>::infinity(), 0.0};
  std::vector<std::uint64_t> ms;
  for (double m = 1; m <= static_cast<double>(L); m = std::max(m + 1.0, std::floor(m * 1.1)))
    ms.push_back(static_cast<std::uint64_t>(m));
  if (ms.back() != L) ms.push_back(L);
  for (std::uint64_t m : ms) {
    const auto env = kernels::envelope_check(kernel, m, kernels::default_n_range(std::max(m, L), 2 * N + 2),
                                             std::numeric_limits<double>::infinity());
    e.kappa1 = std::min(e.kappa1, env.kappa1);
    e.kappa2 = std::max(e.kappa2, env.kappa2);
    e.nu1 = std::min(e.nu1, env.nu1);
    e.nu2 = std::max(e.nu2, env.nu2);
  }
  return e;
}

StarPathBound star_path_bound(std::uint64_t N, std::uint64_t L, std::size_t r, double lambda,
                              const kernels::KernelSpec& kernel, const EnvelopeConsts& env) {
  StarPathBound s;
  const double ex = std::min(kernel.eta, 0.0) - kernel.alpha;
  s.c_p = std::pow(static_cast<double>(L), ex);
  const double q = env.kappa1 / (env.kappa2 * s.c_p) * std::pow(static_cast<double>(N) + 1.0, ex);
  s.C_p = q * q;
  s.base = lambda * env.nu1 * env.kappa1 * s.c_p / (lambda + lambda * env.nu1 + env.nu1 + 1.0);
  s.bound = (1.0 - std::exp(-kGamma)) * std::pow(s.base, static_cast<double>(r)) * s.C_p;
  return s;
}

StarConstants star_constants(std::uint64_t N, std::uint64_t L, double lambda, const kernels::KernelSpec& kernel,
                             const graph::OffspringDistribution& dist) {
  if (L < 1 || N < L) throw ClosedFormError("star_constants: need N >= L >= 1");
  StarConstants s;
  s.N = N;
  s.L = L;
  s.lambda = lambda;
  s.mu_L = dist.mean_truncated(L);
  if (!(s.mu_L > 1.0)) throw ClosedFormError("prune level too low: mu_L = " + std::to_string(s.mu_L) + " <= 1");
  const auto env = star_envelope(kernel, N, L);
  const double Nd = static_cast<double>(N);
  s.T = 1.0 / (1.0 + env.nu2 * std::pow(Nd, kernel.eta));
  s.pNL = kernel.p(N, L);
  s.phi_L = dist.cdf(L - 1);
  s.c_L = s.c * std::exp(-4.0) * s.phi_L;
  s.delta = s.c_L / 8.0;
  s.threshold = s.c_L * Nd * s.pNL;
  s.kbar_exponent = s.delta * lambda * lambda * s.T * s.T * Nd * s.pNL / 4.0;
  s.k_bar = std::floor(std::exp(std::min(s.kbar_exponent, 690.0)));
  s.S = s.T * s.k_bar;
  s.stable_exponent = s.threshold;
  s.stable_windows = std::floor(std::exp(std::min(s.threshold, 690.0)));
  s.stable_bound = 1.0 - std::exp(-s.threshold);
  s.local_survival_ok = 1.5 * lambda * s.T < 1.0;
  s.kickstart_ok = 2.0 * lambda * s.T < 1.0;
  s.underpowered = s.threshold < 1.0;
  return s;
}

SurvivalFunctions survival_functions(const StarConstants& sc, std::size_t r, const kernels::KernelSpec& kernel,
                                     const EnvelopeConsts& env, double universal_C) {
  SurvivalFunctions f;
  f.universal_C = universal_C;
  f.local_survival_ok = sc.local_survival_ok;
  f.kickstart_ok = sc.kickstart_ok;
  const double Nd = static_cast<double>(sc.N);
  const double lam = sc.lambda, T = sc.T, Np = Nd * sc.pNL;
  const double m = std::floor(sc.delta * lam * T * Np);
  f.b = lam * m * T / ((lam * m + 1.0) * T + 1.0) * (1.0 - std::exp(-kGamma));
  f.R = 1.0 - (1.0 - universal_C * std::exp(-sc.delta * lam * lam * T * T * Np)) * std::exp(-2.0 * T) *
                  (1.0 - std::exp(-sc.delta * lam * T * Np));
  const auto spb = star_path_bound(sc.N, sc.L, r, lam, kernel, env);
  const double x = f.b * spb.C_p * std::pow(spb.base, static_cast<double>(r));
  f.m_floor = std::floor(sc.S / (8.0 * static_cast<double>(r) + 4.0 * T));
  if (f.m_floor == 0.0)
    f.F = 1.0;
  else if (x >= 1.0)
    f.F = std::pow(1.0 - x, f.m_floor);
  else
    f.F = std::exp(f.m_floor * std::log1p(-x));
  return f;
}

std::int64_t r_N(double mu_L, double c, double N, double pN) {
  if (!(pN > 0.0)) throw ClosedFormError("r_N: P(zeta = N) = 0");
  if (!(mu_L > 1.0)) throw ClosedFormError("r_N: mu_L <= 1");
  const double val = -std::log(c * N * pN / mu_L) / std::log(mu_L);
  // guard against representation error right at an integer
  const double rv = std::round(val);
  if (std::abs(val - rv) < 1e-9 * std::max(1.0, std::abs(val))) return static_cast<std::int64_t>(rv);
  return static_cast<std::int64_t>(std::ceil(val));
}

StarCondition star_condition_at(const StarConstants& sc, std::int64_t r, double S, const kernels::KernelSpec& kernel,
                                const EnvelopeConsts& env) {
  StarCondition c;
  c.r = r;
  const std::size_t ru = static_cast<std::size_t>(std::max<std::int64_t>(r, 1));
  const auto spb = star_path_bound(sc.N, sc.L, ru, sc.lambda, kernel, env);
  const auto sf = survival_functions(sc, ru, kernel, env);
  const double rd = static_cast<double>(ru);
  c.lhs = std::floor(S / (8.0 * rd + 4.0 * sc.T)) * spb.C_p;
  c.rhs = sf.b > 0.0 ? 4.0 / sf.b * std::pow(spb.base, -rd) : std::numeric_limits<double>::infinity();
  c.satisfied = c.lhs > c.rhs;
  return c;
}

StarCondition r_N_and_star_condition(std::uint64_t N, double lambda, const kernels::KernelSpec& kernel,
                                     const graph::OffspringDistribution& dist, std::uint64_t L, double c) {
  const double pN = dist.pmf(N);
  if (!(pN > 0.0)) throw ClosedFormError("P(zeta = N) = 0 for N = " + std::to_string(N));
  const auto sc = star_constants(N, L, lambda, kernel, dist);
  const auto env = star_envelope(kernel, N, L);
  const std::int64_t r = r_N(sc.mu_L, c, static_cast<double>(N), pN);
  return star_condition_at(sc, r, sc.S, kernel, env);
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::Subcritical: return "Subcritical";
    case Phase::NoPhaseTransition: return "NoPhaseTransition";
    case Phase::FiniteCritical: return "FiniteCritical";
    case Phase::Unknown: return "Unknown";
  }
  return "Unknown";
}

PhaseResult phase_classify(double alpha, double sigma, double eta, TailSpec tail, bool zeta_zero) {
  PhaseResult r;
  const bool stretched = tail.kind == TailSpec::Kind::Stretched;
  const double beta = stretched ? tail.param : 0.0;
  const double cut = 1.0 - beta;  // 1 for power laws
  r.lambda2_finite = alpha < cut;
  if (eta >= 0.0 && (alpha >= 1.0 || (alpha + 2.0 * eta >= 1.0 && alpha * sigma >= 0.5))) {
    r.phase = Phase::Subcritical;
    r.rule = "(i)";
    return r;
  }
  const bool ii_a = eta <= 0.0 && alpha >= 0.0 && alpha < cut;
  const bool ii_b = stretched ? (eta <= cut / 2.0 && alpha > 0.0 && alpha < cut - 2.0 * eta)
                              : (eta >= 0.0 && eta <= 0.5 && alpha > 0.0 && alpha < 1.0 - 2.0 * eta);
  if (ii_a || ii_b) {
    r.phase = Phase::NoPhaseTransition;
    r.rule = "(ii)";
    return r;
  }
  if (eta >= 0.0 && cut - 2.0 * alpha > 0.0 && zeta_zero) {
    r.phase = Phase::NoPhaseTransition;
    r.rule = "(iii)";
    return r;
  }
  r.phase = r.lambda2_finite ? Phase::FiniteCritical : Phase::Unknown;
  r.rule = r.lambda2_finite ? "moreover" : "none";
  return r;
}

}  // namespace cpdg::closedform
