#pragma once
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpdg/graph.hpp"
#include "cpdg/kernels.hpp"

namespace cpdg::closedform {

struct ClosedFormError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kGamma = 2.0 - 2.0 * 0.69314718055994530942;  // 2 - 2 ln 2
inline constexpr double kStarC = 0.15;

double bg_transition(double p, double v, bool open_now, double s);

struct EdgeLaw {
  double lambda = 0, v = 0, p = 0;
  double a = 0, b = 0;  // a >= b, a + b = λ + v, ab = λvp
};
EdgeLaw make_edge_law(double lambda, double v, double p);

double transmission_prob(double lambda, double v, double p);
// P(T^inf > t | T^inf < T^rec, edge initially closed)
double transmission_time_tail(const EdgeLaw& law, double t);
// E[T^inf | T^inf < T^rec]
double transmission_time_mean(const EdgeLaw& law);
double geom_exp_laplace(double alpha, double beta, double q, double theta);
// geometric-sum parameters of the first true infection time: (α, β, q)
struct GeomSumParams {
  double alpha, beta, q;
};
GeomSumParams transmission_geom_params(double lambda, double v, double p);

double lower_bound_rate(double lambda, double v, double p);
double two_state_hit_prob(double lambda, double M, double t);

// Factor λvp/(λ+v+λvp+1) for one edge.
double edge_factor(double lambda, double v, double p);

struct PathBound {
  double bound = 0;  // (1 - e^{-γ r}) Π factors
  double product = 0;
  std::size_t r = 0;
};
PathBound path_lower_bound(const std::vector<std::uint32_t>& degrees, double lambda,
                           const kernels::KernelSpec& kernel);

struct EnvelopeConsts {
  double kappa1, kappa2, nu1, nu2;
};
// Envelope constants for star computations: over n in [L, 2N+2] and m in [1, L].
EnvelopeConsts star_envelope(const kernels::KernelSpec& kernel, std::uint64_t N, std::uint64_t L);

struct StarPathBound {
  double c_p = 0, C_p = 0, base = 0, bound = 0;
};
StarPathBound star_path_bound(std::uint64_t N, std::uint64_t L, std::size_t r, double lambda,
                              const kernels::KernelSpec& kernel, const EnvelopeConsts& env);

struct StarConstants {
  std::uint64_t N = 0, L = 0;
  double lambda = 0;
  double T = 0;        // T_N
  double pNL = 0;      // p(N, L)
  double phi_L = 0;    // P(ζ <= L-1)
  double mu_L = 0;
  double c = kStarC;
  double c_L = 0;
  double delta = 0;
  double threshold = 0;  // c_L N p(N,L)
  double kbar_exponent = 0;  // δλ²T²Np/4
  double k_bar = 0;          // ⌊e^{...}⌋ (may be huge)
  double S = 0;              // T k_bar
  double stable_exponent = 0;  // c_L N p(N,L)
  double stable_windows = 0;   // ⌊e^{c_L N p(N,L)}⌋
  double stable_bound = 0;     // 1 - e^{-c_L N p(N,L)}
  bool local_survival_ok = false;  // 3/2 λ T < 1
  bool kickstart_ok = false;       // 2 λ T < 1
  bool underpowered = false;       // threshold < 1
};
StarConstants star_constants(std::uint64_t N, std::uint64_t L, double lambda, const kernels::KernelSpec& kernel,
                             const graph::OffspringDistribution& dist);

struct SurvivalFunctions {
  double R = 0, F = 0, b = 0;
  double m_floor = 0;  // ⌊S/(8r+4T)⌋
  bool local_survival_ok = false, kickstart_ok = false;
  double universal_C = 1.0;  // values depend on this constant
};
SurvivalFunctions survival_functions(const StarConstants& sc, std::size_t r, const kernels::KernelSpec& kernel,
                                     const EnvelopeConsts& env, double universal_C = 1.0);

// r_N from μ_L, c, N and P(ζ = N)
std::int64_t r_N(double mu_L, double c, double N, double pN);

struct StarCondition {
  std::int64_t r = 0;
  double lhs = 0, rhs = 0;
  bool satisfied = false;
};
StarCondition r_N_and_star_condition(std::uint64_t N, double lambda, const kernels::KernelSpec& kernel,
                                     const graph::OffspringDistribution& dist, std::uint64_t L, double c);
// (★) for a given r and S (exposed so the dependence on S can be examined)
StarCondition star_condition_at(const StarConstants& sc, std::int64_t r, double S, const kernels::KernelSpec& kernel,
                                const EnvelopeConsts& env);

enum class Phase { Subcritical, NoPhaseTransition, FiniteCritical, Unknown };
std::string to_string(Phase p);
struct TailSpec {
  enum class Kind { PowerLaw, Stretched } kind = Kind::PowerLaw;
  double param = 0;  // b or β
};
struct PhaseResult {
  Phase phase = Phase::Unknown;
  bool lambda2_finite = false;  // "moreover" flag
  std::string rule;             // which clause fired
};
PhaseResult phase_classify(double alpha, double sigma, double eta, TailSpec tail, bool zeta_zero);

}  // namespace cpdg::closedform
