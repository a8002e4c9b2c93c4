#include "cpdg/oracle.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

namespace cpdg::oracle {

ExactModel build_exact(const graph::GraphView& g, const kernels::KernelSpec& kernel, double lambda) {
  if (g.lazy()) throw OracleError("exact model needs a finite graph");
  ExactModel m;
  m.V = static_cast<std::uint32_t>(g.num_vertices());
  m.E = static_cast<std::uint32_t>(g.num_edges());
  if (m.V + m.E > 20) throw OracleError("state cap exceeded: 2^(V+E) > 2^20");
  m.states = std::size_t{1} << (m.V + m.E);
  m.lambda = lambda;
  for (graph::EdgeId e = 0; e < m.E; ++e) {
    const auto [x, y] = g.endpoints(e);
    m.ends_u.push_back(x);
    m.ends_v.push_back(y);
    m.p.push_back(kernel.p(g.degree(x), g.degree(y)));
    m.v.push_back(kernel.v(g.degree(x), g.degree(y)));
  }
  m.row.assign(m.states + 1, 0);
  m.exit.assign(m.states, 0.0);
  for (std::size_t s = 0; s < m.states; ++s) {
    m.row[s] = m.col.size();
    const std::uint32_t c = m.c_mask(s), b = m.b_mask(s);
    double out = 0.0;
    auto add = [&](std::size_t to, double r) {
      if (r <= 0.0) return;
      m.col.push_back(static_cast<std::uint32_t>(to));
      m.rate.push_back(r);
      out += r;
    };
    for (std::uint32_t e = 0; e < m.E; ++e) {
      const bool open = (b >> e) & 1u;
      add(m.index(c, b ^ (1u << e)), open ? m.v[e] * (1.0 - m.p[e]) : m.v[e] * m.p[e]);
      if (open) {
        const bool iu = (c >> m.ends_u[e]) & 1u, iv = (c >> m.ends_v[e]) & 1u;
        if (iu != iv) add(m.index(c | (1u << m.ends_u[e]) | (1u << m.ends_v[e]), b), lambda);
      }
    }
    for (std::uint32_t x = 0; x < m.V; ++x)
      if ((c >> x) & 1u) add(m.index(c & ~(1u << x), b), 1.0);
    m.exit[s] = out;
  }
  m.row[m.states] = m.col.size();
  return m;
}

std::vector<double> initial_distribution(const ExactModel& m, std::uint32_t c0) {
  std::vector<double> pi(m.states, 0.0);
  for (std::uint32_t b = 0; b < (1u << m.E); ++b) {
    double w = 1.0;
    for (std::uint32_t e = 0; e < m.E; ++e) w *= ((b >> e) & 1u) ? m.p[e] : 1.0 - m.p[e];
    pi[m.index(c0, b)] = w;
  }
  return pi;
}

std::vector<double> transient(const ExactModel& m, const std::vector<double>& init, double t, double tol) {
  if (t < 0.0) throw OracleError("negative time");
  if (t == 0.0) return init;
  double q = 0.0;
  for (double x : m.exit) q = std::max(q, x);
  if (q == 0.0) return init;
  q *= 1.02;
  const double qt = q * t;
  std::vector<double> cur = init, nxt(m.states), out(m.states, 0.0);
  double cum = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double w = std::exp(-qt + static_cast<double>(k) * std::log(qt) - std::lgamma(static_cast<double>(k) + 1.0));
    for (std::size_t s = 0; s < m.states; ++s) out[s] += w * cur[s];
    cum += w;
    if (1.0 - cum < tol && static_cast<double>(k) > qt) break;
    if (k > 100000) throw OracleError("uniformization did not converge");
    for (std::size_t s = 0; s < m.states; ++s) nxt[s] = cur[s] * (1.0 - m.exit[s] / q);
    for (std::size_t s = 0; s < m.states; ++s) {
      const double ps = cur[s];
      if (ps == 0.0) continue;
      for (std::size_t i = m.row[s]; i < m.row[s + 1]; ++i) nxt[m.col[i]] += ps * m.rate[i] / q;
    }
    cur.swap(nxt);
  }
  return out;
}

double transient_prob(const ExactModel& m, const std::vector<double>& init, double t,
                      const std::function<bool(std::uint32_t, std::uint32_t)>& event) {
  const auto pi = transient(m, init, t);
  double acc = 0.0;
  for (std::size_t s = 0; s < m.states; ++s)
    if (event(m.c_mask(s), m.b_mask(s))) acc += pi[s];
  return acc;
}

ExtinctionStats extinction_stats(const ExactModel& m, const std::vector<double>& init) {
  ExtinctionStats st;
  // states with C != ∅ reachable from the initial support
  std::vector<std::int64_t> id(m.states, -1);
  std::vector<std::size_t> order, stack;
  for (std::size_t s = 0; s < m.states; ++s)
    if (init[s] > 0.0 && m.c_mask(s) != 0 && id[s] < 0) {
      id[s] = static_cast<std::int64_t>(order.size());
      order.push_back(s);
      stack.push_back(s);
    }
  while (!stack.empty()) {
    const std::size_t s = stack.back();
    stack.pop_back();
    for (std::size_t i = m.row[s]; i < m.row[s + 1]; ++i) {
      const std::size_t t = m.col[i];
      if (m.c_mask(t) != 0 && id[t] < 0) {
        id[t] = static_cast<std::int64_t>(order.size());
        order.push_back(t);
        stack.push_back(t);
      }
    }
  }
  const std::size_t n = order.size();
  st.transient_states = n;
  double mass_absorbed = 0.0;
  for (std::size_t s = 0; s < m.states; ++s)
    if (m.c_mask(s) == 0) mass_absorbed += init[s];
  if (n == 0) {
    st.p_extinct = mass_absorbed;
    return st;
  }
  using SpMat = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  Eigen::VectorXd absorb = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t s = order[k];
    const auto r = static_cast<Eigen::Index>(k);
    trip.emplace_back(r, r, m.exit[s]);
    for (std::size_t i = m.row[s]; i < m.row[s + 1]; ++i) {
      const std::size_t t = m.col[i];
      if (m.c_mask(t) == 0)
        absorb[r] += m.rate[i];
      else
        trip.emplace_back(r, static_cast<Eigen::Index>(id[t]), -m.rate[i]);
    }
  }
  SpMat A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw OracleError("singular absorption system");
  const Eigen::VectorXd mt = lu.solve(ones);
  const Eigen::VectorXd h = lu.solve(absorb);
  double mean = 0.0, pe = mass_absorbed;
  for (std::size_t k = 0; k < n; ++k) {
    mean += init[order[k]] * mt[static_cast<Eigen::Index>(k)];
    pe += init[order[k]] * h[static_cast<Eigen::Index>(k)];
  }
  st.mean_time = mean;
  st.p_extinct = pe;
  return st;
}

}  // namespace cpdg::oracle
