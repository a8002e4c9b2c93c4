#include "cpdg/engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "cpdg/closedform.hpp"

namespace cpdg::engine {

namespace {
constexpr std::uint64_t kEdgeTag = 0x65646765ULL;
constexpr std::uint64_t kVertexTag = 0x76657274ULL;
}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::CPDG: return "cpdg";
    case Variant::WaitAndSee: return "waitandsee";
    case Variant::Penalised: return "penalised";
    case Variant::LowerBound: return "lowerbound";
  }
  return "cpdg";
}

Variant parse_variant(const std::string& s) {
  if (s == "cpdg") return Variant::CPDG;
  if (s == "waitandsee") return Variant::WaitAndSee;
  if (s == "penalised") return Variant::Penalised;
  if (s == "lowerbound") return Variant::LowerBound;
  throw std::invalid_argument("unknown variant '" + s + "'");
}

std::string to_string(Censor c) {
  switch (c) {
    case Censor::None: return "none";
    case Censor::Horizon: return "horizon";
    case Censor::Cap: return "cap";
    case Censor::TruncatedTree: return "truncated_tree";
    case Censor::Target: return "target";
  }
  return "none";
}

Simulator::Simulator(graph::GraphView& g, const kernels::KernelSpec& kernel, Options opt)
    : g_(g), kernel_(kernel), opt_(opt) {
  if (opt_.background == BackgroundMode::Eager && g_.lazy())
    throw std::invalid_argument("eager background needs a finite graph");
  if (!(opt_.lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
}

void Simulator::sync_sizes() {
  const std::size_t E0 = edges_.size();
  edges_.resize(g_.num_edges());
  for (std::size_t e = E0; e < edges_.size(); ++e) {
    const auto [x, y] = g_.endpoints(static_cast<EdgeId>(e));
    auto& er = edges_[e];
    er.p = kernel_.p(g_.degree(x), g_.degree(y));
    er.v = kernel_.v(g_.degree(x), g_.degree(y));
    er.a_ratio = opt_.lambda > 0.0 ? closedform::lower_bound_rate(opt_.lambda, er.v, er.p) / opt_.lambda : 0.0;
  }
  verts_.resize(g_.num_vertices());
  for (auto& L : layers_) {
    L.inf.resize(g_.num_vertices(), 0);
    if (L.variant == Variant::WaitAndSee) {
      L.revealed.resize(g_.num_edges(), 0);
      L.consumed.resize(g_.num_edges(), 0);
    }
  }
}

void Simulator::push(double t, Kind k, std::uint32_t id, std::uint32_t gen) {
  if (std::isfinite(t)) q_.push(Event{t, seq_++, id, gen, static_cast<std::uint8_t>(k)});
}

void Simulator::init_edge_stream(EdgeId e) {
  auto& er = edges_[e];
  er.rng.seed(hash_combine(seed_, g_.edge_key(e), kEdgeTag));
  er.rng_inf.seed(hash_combine(seed_, g_.edge_key(e), kEdgeTag + 1));
  er.stream = 1;
  if (opt_.background != BackgroundMode::Lazy) {
    // Poisson streams anchored at time 0
    er.seen = 1;
    er.open = opt_.initial == InitialBackground::AllClosed ? 0 : (er.rng.uniform() < er.p);
    er.next_up = er.rng.exponential(er.v);
    er.next_inf = er.rng_inf.exponential(opt_.lambda);
  }
}

void Simulator::init_vertex_stream(VertexId v) {
  auto& vr = verts_[v];
  vr.rng.seed(hash_combine(seed_, g_.vertex_key(v), kVertexTag));
  vr.stream = 1;
  if (opt_.background != BackgroundMode::Lazy) vr.next_rec = vr.rng.exponential(1.0);
}

void Simulator::advance_idle(EdgeId e, double t) {
  auto& er = edges_[e];
  if (!er.stream) init_edge_stream(e);
  if (opt_.background == BackgroundMode::Lazy) {
    if (!er.seen) {
      er.seen = 1;
      if (opt_.initial == InitialBackground::Stationary) {
        er.open = er.rng.uniform() < er.p;
        er.last_t = t;
        return;
      }
      er.open = 0;
      er.last_t = 0.0;
    }
    const double s = t - er.last_t;
    if (s > 0.0 && er.rng.uniform() >= std::exp(-er.v * s)) {
      er.open = er.rng.uniform() < er.p;
      ++er.epoch;
    }
    er.last_t = t;
    return;
  }
  while (er.next_up <= t) {
    er.open = er.rng.uniform() < er.p;
    ++er.epoch;
    er.next_up += er.rng.exponential(er.v);
  }
  while (er.next_inf <= t) {
    er.rng_inf.uniform();
    er.rng_inf.uniform();
    er.next_inf += er.rng_inf.exponential(opt_.lambda);
  }
}

void Simulator::schedule_edge(EdgeId e) {
  auto& er = edges_[e];
  ++er.gen;
  if (opt_.background == BackgroundMode::Lazy) {
    if (needs_updates_) push(clock_ + er.rng.exponential(er.v), kUpdate, e, er.gen);
    push(clock_ + er.rng_inf.exponential(opt_.lambda), kInfect, e, er.gen);
  } else {
    push(er.next_up, kUpdate, e, er.gen);
    push(er.next_inf, kInfect, e, er.gen);
  }
}

void Simulator::activate(EdgeId e, double t) {
  auto& er = edges_[e];
  if (!er.stream) init_edge_stream(e);
  if (opt_.background == BackgroundMode::Replay || needs_state_) advance_idle(e, t);
  schedule_edge(e);
}

void Simulator::inc_activity(EdgeId e, double t) {
  if (edges_[e].activity++ == 0 && opt_.background != BackgroundMode::Eager) activate(e, t);
}

void Simulator::dec_activity(EdgeId e, double t) {
  auto& er = edges_[e];
  if (--er.activity == 0 && opt_.background != BackgroundMode::Eager) {
    er.last_t = t;
    ++er.gen;
  }
}

void Simulator::infect(std::size_t li, VertexId y, double t) {
  auto& L = layers_[li];
  L.inf[y] = 1;
  ++L.count;
  ++L.rec.infections;
  L.rec.peak_infected = std::max<std::uint64_t>(L.rec.peak_infected, L.count);
  if (y == 0 && t > 0.0) L.rec.root_reinfection_times.push_back(t);
  if (trace_) trace_->push_back({t, static_cast<std::uint32_t>(li), y, true});
  if (g_.lazy() && opt_.grow && !g_.materialized(y)) {
    if (!g_.materialize(y)) {
      finish(Censor::TruncatedTree, t);
      return;
    }
    sync_sizes();
  }
  auto& vr = verts_[y];
  if (vr.layers++ == 0 && opt_.background != BackgroundMode::Eager) {
    if (!vr.stream) init_vertex_stream(y);
    ++vr.gen;
    if (opt_.background == BackgroundMode::Lazy) {
      vr.next_rec = t + vr.rng.exponential(1.0);
    } else {
      while (vr.next_rec <= t) vr.next_rec += vr.rng.exponential(1.0);
    }
    push(vr.next_rec, kRecover, y, vr.gen);
  }
  for (const auto& a : g_.neighbors(y)) inc_activity(a.edge, t);
  if (li == 0 && y == opt_.target) {
    L.rec.target_hit_time = t;
    finish(Censor::Target, t);
    return;
  }
  if (L.count > opt_.caps.max_infected) finish(Censor::Cap, t);
}

void Simulator::recover(std::size_t li, VertexId x, double t) {
  auto& L = layers_[li];
  L.inf[x] = 0;
  --L.count;
  ++L.rec.recoveries;
  --verts_[x].layers;
  if (trace_) trace_->push_back({t, static_cast<std::uint32_t>(li), x, false});
  for (const auto& a : g_.neighbors(x)) dec_activity(a.edge, t);
  if (L.count == 0 && !L.done) {
    L.done = true;
    L.rec.extinct = true;
    L.rec.time = t;
    if (--live_layers_ == 0) finish(Censor::None, t);
  }
}

void Simulator::handle_update(EdgeId e, double t) {
  auto& er = edges_[e];
  if (opt_.log) *opt_.log << t << " update " << e;
  if (needs_state_ || opt_.background != BackgroundMode::Lazy) er.open = er.rng.uniform() < er.p;
  ++er.epoch;
  if (opt_.background != BackgroundMode::Lazy) er.next_up += er.rng.exponential(er.v);
  for (auto& L : layers_)
    if (L.variant == Variant::WaitAndSee && L.revealed[e]) {
      L.revealed[e] = 0;
      dec_activity(e, t);
    }
  if (opt_.log) *opt_.log << " " << (er.open ? "open" : "closed") << "\n";
  for (auto& L : layers_) ++L.rec.updates;
  if (opt_.background == BackgroundMode::Eager || er.activity > 0) {
    const double nt = opt_.background == BackgroundMode::Lazy ? t + er.rng.exponential(er.v) : er.next_up;
    push(nt, kUpdate, e, er.gen);
  }
}

void Simulator::handle_infect(EdgeId e, double t) {
  auto& er = edges_[e];
  const double u_l = er.rng_inf.uniform();
  const double u_p = er.rng_inf.uniform();
  if (opt_.background != BackgroundMode::Lazy) er.next_inf += er.rng_inf.exponential(opt_.lambda);
  const auto [x, y] = g_.endpoints(e);
  if (opt_.log) *opt_.log << t << " infect " << e << " " << x << "-" << y << "\n";
  for (auto& L : layers_) ++L.rec.attempts;
  // infect() may grow the tree and reallocate edges_, so re-index after it
  for (std::size_t li = 0; li < layers_.size() && !finished_; ++li) {
    auto& L = layers_[li];
    if (L.done || u_l >= L.thin) continue;
    const bool ix = L.inf[x] != 0, iy = L.inf[y] != 0;
    if (!ix && !iy) continue;
    bool transmit = false;
    switch (L.variant) {
      case Variant::CPDG: transmit = edges_[e].open != 0; break;
      case Variant::Penalised: transmit = u_p < edges_[e].p; break;
      case Variant::LowerBound: transmit = u_p < edges_[e].a_ratio; break;
      case Variant::WaitAndSee:
        if (L.revealed[e]) {
          transmit = true;
        } else {
          bool reveal;
          if (needs_state_ && L.consumed[e] != edges_[e].epoch + 1) {
            reveal = edges_[e].open != 0;
            if (!reveal) L.consumed[e] = edges_[e].epoch + 1;
          } else {
            reveal = u_p < edges_[e].p;
          }
          if (reveal) {
            L.revealed[e] = 1;
            inc_activity(e, t);
            transmit = true;
          }
        }
        break;
    }
    if (transmit && ix != iy) infect(li, ix ? y : x, t);
  }
  touched_.push_back(x);
  touched_.push_back(y);
  if (finished_) return;
  auto& ed = edges_[e];
  if (opt_.background == BackgroundMode::Eager || ed.activity > 0) {
    const double nt = opt_.background == BackgroundMode::Lazy ? t + ed.rng_inf.exponential(opt_.lambda) : ed.next_inf;
    push(nt, kInfect, e, ed.gen);
  }
}

void Simulator::handle_recover(VertexId x, double t) {
  auto& vr = verts_[x];
  if (opt_.log) *opt_.log << t << " recover " << x << "\n";
  if (opt_.background != BackgroundMode::Lazy) vr.next_rec += vr.rng.exponential(1.0);
  for (std::size_t li = 0; li < layers_.size(); ++li)
    if (layers_[li].inf[x]) recover(li, x, t);
  touched_.push_back(x);
  if (opt_.background == BackgroundMode::Eager)
    push(vr.next_rec, kRecover, x, vr.gen);
  else
    ++vr.gen;
}

void Simulator::check_containment(VertexId v) {
  for (const auto& [s, b] : contain_)
    if (layers_[s].inf[v] && !layers_[b].inf[v]) violation_ = true;
}

void Simulator::finish(Censor c, double t) {
  if (finished_) return;
  finished_ = true;
  if (opt_.background == BackgroundMode::Lazy)
    for (auto& er : edges_)
      if (er.activity > 0) {
        er.activity = 0;
        er.last_t = t;
      }
  for (auto& L : layers_) {
    if (!L.done) {
      L.done = true;
      L.rec.censor = c;
      L.rec.time = t;
    }
    L.rec.total_events = events_;
  }
}

void Simulator::reset(std::uint64_t seed, const std::vector<LayerSpec>& specs) {
  seed_ = seed;
  clock_ = 0.0;
  seq_ = events_ = 0;
  finished_ = violation_ = false;
  q_ = decltype(q_)();
  edges_.clear();
  verts_.clear();
  layers_.clear();
  needs_state_ = needs_updates_ = false;
  for (const auto& s : specs) {
    Layer L;
    L.variant = s.variant;
    L.thin = s.thin;
    L.rec.seed = seed;
    layers_.push_back(std::move(L));
    needs_state_ |= s.variant == Variant::CPDG;
    needs_updates_ |= s.variant == Variant::CPDG || s.variant == Variant::WaitAndSee;
  }
  sync_sizes();
  live_layers_ = layers_.size();
  if (opt_.background == BackgroundMode::Eager) {
    for (EdgeId e = 0; e < edges_.size(); ++e) {
      init_edge_stream(e);
      push(edges_[e].next_up, kUpdate, e, 0);
      push(edges_[e].next_inf, kInfect, e, 0);
    }
    for (VertexId v = 0; v < verts_.size(); ++v) {
      init_vertex_stream(v);
      push(verts_[v].next_rec, kRecover, v, 0);
    }
  }
  for (std::size_t li = 0; li < specs.size() && !finished_; ++li) {
    auto init = specs[li].init;
    std::sort(init.begin(), init.end());
    init.erase(std::unique(init.begin(), init.end()), init.end());
    for (VertexId v : init) {
      if (v >= g_.num_vertices()) throw std::invalid_argument("initial vertex out of range");
      if (!finished_) infect(li, v, 0.0);
    }
  }
  for (auto& L : layers_)
    if (L.count == 0 && !L.done) {
      L.done = true;
      L.rec.extinct = true;
      L.rec.time = 0.0;
      --live_layers_;
    }
  if (live_layers_ == 0) finish(Censor::None, 0.0);
  for (VertexId v = 0; v < g_.num_vertices() && !contain_.empty(); ++v) check_containment(v);
  if (!finished_ && opt_.caps.horizon <= 0.0) finish(Censor::Horizon, 0.0);
}

bool Simulator::step() {
  while (!finished_) {
    if (q_.empty()) {
      finish(Censor::Horizon, opt_.caps.horizon);
      return false;
    }
    const Event ev = q_.top();
    if (ev.t > opt_.caps.horizon) {
      clock_ = opt_.caps.horizon;
      finish(Censor::Horizon, opt_.caps.horizon);
      return false;
    }
    q_.pop();
    const bool valid = ev.kind == kRecover ? ev.gen == verts_[ev.id].gen : ev.gen == edges_[ev.id].gen;
    if (!valid) continue;
    clock_ = ev.t;
    ++events_;
    touched_.clear();
    switch (ev.kind) {
      case kUpdate: handle_update(ev.id, ev.t); break;
      case kInfect: handle_infect(ev.id, ev.t); break;
      default: handle_recover(ev.id, ev.t); break;
    }
    if (!contain_.empty())
      for (VertexId v : touched_) check_containment(v);
    if (finished_)
      for (auto& L : layers_) L.rec.total_events = events_;
    return !finished_;
  }
  return false;
}

void Simulator::run() {
  while (step()) {
  }
}

void Simulator::run_until(double t) {
  while (!finished_) {
    while (!q_.empty()) {
      const Event& ev = q_.top();
      const bool valid = ev.kind == kRecover ? ev.gen == verts_[ev.id].gen : ev.gen == edges_[ev.id].gen;
      if (valid) break;
      q_.pop();
    }
    if (q_.empty() || q_.top().t > t) break;
    step();
  }
  if (!finished_) clock_ = std::max(clock_, std::min(t, opt_.caps.horizon));
}

std::vector<VertexId> Simulator::infected_set(std::size_t layer) const {
  std::vector<VertexId> out;
  const auto& inf = layers_[layer].inf;
  for (VertexId v = 0; v < inf.size(); ++v)
    if (inf[v]) out.push_back(v);
  return out;
}

std::vector<std::uint8_t> Simulator::resolve_background(double t) {
  if (t < 0.0) t = clock_;
  if (t < clock_) throw std::invalid_argument("resolve_background: time before the clock");
  std::vector<std::uint8_t> b(edges_.size());
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    auto& er = edges_[e];
    if (opt_.background == BackgroundMode::Lazy) {
      if (er.activity == 0 || !needs_state_) advance_idle(e, t);
    } else {
      if (!er.stream) init_edge_stream(e);
      while (er.next_up <= t) {
        er.open = er.rng.uniform() < er.p;
        ++er.epoch;
        er.next_up += er.rng.exponential(er.v);
      }
    }
    b[e] = er.open;
  }
  return b;
}

// ---------------------------------------------------------------- wrappers

TrajectoryRecord run_replica(graph::GraphView& g, const kernels::KernelSpec& kernel, double lambda, Variant variant,
                             const std::vector<VertexId>& init, const RunCaps& caps, std::uint64_t seed,
                             BackgroundMode mode) {
  Options o;
  o.lambda = lambda;
  o.caps = caps;
  o.background = mode;
  Simulator sim(g, kernel, o);
  sim.reset(seed, {LayerSpec{variant, 1.0, init}});
  sim.run();
  return sim.record(0);
}

CoupledResult run_coupled(graph::GraphView& g, const kernels::KernelSpec& kernel, double lambda,
                          const std::vector<VertexId>& init_small, const std::vector<VertexId>& init_big,
                          const RunCaps& caps, std::uint64_t seed) {
  for (VertexId v : init_small)
    if (std::find(init_big.begin(), init_big.end(), v) == init_big.end())
      throw std::invalid_argument("run_coupled: init_small must be a subset of init_big");
  Options o;
  o.lambda = lambda;
  o.caps = caps;
  Simulator sim(g, kernel, o);
  sim.add_containment(0, 1);
  sim.reset(seed, {LayerSpec{Variant::CPDG, 1.0, init_small}, LayerSpec{Variant::CPDG, 1.0, init_big}});
  sim.run();
  return {sim.record(0), sim.record(1), sim.violation()};
}

CoupledResult run_lambda_coupled(graph::GraphView& g, const kernels::KernelSpec& kernel, double lambda_small,
                                 double lambda_big, const std::vector<VertexId>& init, const RunCaps& caps,
                                 std::uint64_t seed) {
  if (!(lambda_small <= lambda_big) || !(lambda_big > 0.0))
    throw std::invalid_argument("run_lambda_coupled: need 0 <= lambda_small <= lambda_big, lambda_big > 0");
  Options o;
  o.lambda = lambda_big;
  o.caps = caps;
  Simulator sim(g, kernel, o);
  sim.add_containment(0, 1);
  sim.reset(seed, {LayerSpec{Variant::CPDG, lambda_small / lambda_big, init}, LayerSpec{Variant::CPDG, 1.0, init}});
  sim.run();
  return {sim.record(0), sim.record(1), sim.violation()};
}

CoupledResult run_waitandsee_dominating(graph::GraphView& g, const kernels::KernelSpec& kernel, double lambda,
                                        const std::vector<VertexId>& init, const RunCaps& caps, std::uint64_t seed) {
  Options o;
  o.lambda = lambda;
  o.caps = caps;
  Simulator sim(g, kernel, o);
  sim.add_containment(0, 1);
  sim.reset(seed, {LayerSpec{Variant::CPDG, 1.0, init}, LayerSpec{Variant::WaitAndSee, 1.0, init}});
  sim.run();
  CoupledResult r{sim.record(0), sim.record(1), sim.violation()};
  // extinction of the dominating process forces extinction of the CPDG no later
  if (r.second.extinct && !(r.first.extinct && r.first.time <= r.second.time)) r.violation = true;
  return r;
}

}  // namespace cpdg::engine
