#pragma once
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "cpdg/graph.hpp"
#include "cpdg/kernels.hpp"
#include "cpdg/rng.hpp"

namespace cpdg::engine {

using graph::EdgeId;
using graph::VertexId;

enum class Variant : std::uint8_t { CPDG, WaitAndSee, Penalised, LowerBound };
// Lazy: idle edges advanced by the two-state transition law on re-activation.
// Replay: idle edges replay their own Poisson streams (pathwise equal to Eager).
// Eager: every clock of every edge and vertex runs from time 0 (finite graphs only).
enum class BackgroundMode : std::uint8_t { Lazy, Replay, Eager };
enum class InitialBackground : std::uint8_t { Stationary, AllClosed };
enum class Censor : std::uint8_t { None, Horizon, Cap, TruncatedTree, Target };

std::string to_string(Variant v);
std::string to_string(Censor c);
Variant parse_variant(const std::string& s);

struct RunCaps {
  double horizon = std::numeric_limits<double>::infinity();
  std::uint64_t max_infected = std::numeric_limits<std::uint64_t>::max();
};

struct Options {
  double lambda = 1.0;  // clock rate of Δ^inf
  RunCaps caps;
  BackgroundMode background = BackgroundMode::Lazy;
  InitialBackground initial = InitialBackground::Stationary;
  bool grow = true;                     // materialize lazily grown trees on infection
  VertexId target = graph::kNoVertex;   // stop at the first infection of target (layer 0)
  std::ostream* log = nullptr;          // "t kind id payload" lines
};

struct LayerSpec {
  Variant variant = Variant::CPDG;
  double thin = 1.0;  // keep an infection event with this probability (λ-coupling)
  std::vector<VertexId> init;
};

struct TrajectoryRecord {
  bool extinct = false;
  double time = 0.0;  // extinction time, or time of censoring
  Censor censor = Censor::None;
  std::vector<double> root_reinfection_times;
  std::uint64_t peak_infected = 0;
  std::uint64_t total_events = 0;
  std::uint64_t infections = 0, recoveries = 0, attempts = 0, updates = 0;
  double target_hit_time = -1.0;
  std::uint64_t seed = 0;
  bool operator==(const TrajectoryRecord&) const = default;
};

struct Change {
  double t;
  std::uint32_t layer;
  VertexId v;
  bool infected;
  bool operator==(const Change&) const = default;
};

class Simulator {
 public:
  Simulator(graph::GraphView& g, const kernels::KernelSpec& kernel, Options opt);

  void reset(std::uint64_t seed, const std::vector<LayerSpec>& layers);
  bool step();  // false once finished
  void run();
  void run_until(double t);  // process events up to t; clock = t unless finished earlier
  bool finished() const { return finished_; }
  double clock() const { return clock_; }

  void add_containment(std::size_t small, std::size_t big) { contain_.push_back({small, big}); }
  bool violation() const { return violation_; }
  void set_trace(std::vector<Change>* trace) { trace_ = trace; }

  std::size_t num_layers() const { return layers_.size(); }
  bool infected(std::size_t layer, VertexId v) const { return layers_[layer].inf[v] != 0; }
  std::size_t infected_count(std::size_t layer) const { return layers_[layer].count; }
  std::vector<VertexId> infected_set(std::size_t layer) const;
  bool revealed(std::size_t layer, EdgeId e) const {
    return !layers_[layer].revealed.empty() && layers_[layer].revealed[e] != 0;
  }
  // Open/closed state of every edge at time t >= clock (default: the clock).
  std::vector<std::uint8_t> resolve_background(double t = -1.0);
  const TrajectoryRecord& record(std::size_t layer) const { return layers_[layer].rec; }
  const graph::GraphView& graph() const { return g_; }
  const kernels::KernelSpec& kernel() const { return kernel_; }
  const Options& options() const { return opt_; }
  double edge_p(EdgeId e) const { return edges_[e].p; }
  double edge_v(EdgeId e) const { return edges_[e].v; }

 private:
  enum Kind : std::uint8_t { kUpdate = 0, kInfect = 1, kRecover = 2 };
  struct Event {
    double t;
    std::uint64_t seq;
    std::uint32_t id;
    std::uint32_t gen;
    std::uint8_t kind;
    bool operator>(const Event& o) const { return t > o.t || (t == o.t && seq > o.seq); }
  };
  struct EdgeRt {
    double p = 0, v = 0, a_ratio = 0;
    double last_t = 0;
    double next_up = 0, next_inf = 0;
    std::uint32_t activity = 0, gen = 0, epoch = 0;
    std::uint8_t seen = 0, open = 0, stream = 0;
    Rng rng;      // updates and state draws
    Rng rng_inf;  // infection clock and its marks
  };
  struct VertexRt {
    double next_rec = 0;
    std::uint32_t gen = 0;
    std::uint32_t layers = 0;  // number of layers in which infected
    std::uint8_t stream = 0;
    Rng rng;
  };
  struct Layer {
    Variant variant = Variant::CPDG;
    double thin = 1.0;
    std::vector<std::uint8_t> inf;
    std::vector<std::uint8_t> revealed;
    std::vector<std::uint32_t> consumed;  // epoch+1 at which the open state was consumed
    std::size_t count = 0;
    bool done = false;
    TrajectoryRecord rec;
  };

  void sync_sizes();
  void push(double t, Kind k, std::uint32_t id, std::uint32_t gen);
  void init_edge_stream(EdgeId e);
  void init_vertex_stream(VertexId v);
  void activate(EdgeId e, double t);
  void advance_idle(EdgeId e, double t);
  void inc_activity(EdgeId e, double t);
  void dec_activity(EdgeId e, double t);
  void infect(std::size_t li, VertexId y, double t);
  void recover(std::size_t li, VertexId x, double t);
  void handle_update(EdgeId e, double t);
  void handle_infect(EdgeId e, double t);
  void handle_recover(VertexId x, double t);
  void check_containment(VertexId v);
  void finish(Censor c, double t);
  void schedule_edge(EdgeId e);

  graph::GraphView& g_;
  kernels::KernelSpec kernel_;
  Options opt_;
  bool needs_state_ = true, needs_updates_ = true;
  std::uint64_t seed_ = 0;
  double clock_ = 0;
  std::uint64_t seq_ = 0, events_ = 0;
  bool finished_ = false, violation_ = false;
  std::size_t live_layers_ = 0;
  std::vector<EdgeRt> edges_;
  std::vector<VertexRt> verts_;
  std::vector<Layer> layers_;
  std::vector<std::pair<std::size_t, std::size_t>> contain_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> q_;
  std::vector<Change>* trace_ = nullptr;
  std::vector<VertexId> touched_;
};

// Convenience wrappers ------------------------------------------------------------

TrajectoryRecord run_replica(graph::GraphView& g, const kernels::KernelSpec& kernel, double lambda, Variant variant,
                             const std::vector<VertexId>& init, const RunCaps& caps, std::uint64_t seed,
                             BackgroundMode mode = BackgroundMode::Lazy);

struct CoupledResult {
  TrajectoryRecord first, second;
  bool violation = false;
};
// Two CPDG copies from nested initial sets on one graphical representation.
CoupledResult run_coupled(graph::GraphView& g, const kernels::KernelSpec& kernel, double lambda,
                          const std::vector<VertexId>& init_small, const std::vector<VertexId>& init_big,
                          const RunCaps& caps, std::uint64_t seed);
// CPDG at rates λ <= λ' sharing one event stream.
CoupledResult run_lambda_coupled(graph::GraphView& g, const kernels::KernelSpec& kernel, double lambda_small,
                                 double lambda_big, const std::vector<VertexId>& init, const RunCaps& caps,
                                 std::uint64_t seed);
// CPDG (first) and the wait-and-see process (second) on shared streams.
CoupledResult run_waitandsee_dominating(graph::GraphView& g, const kernels::KernelSpec& kernel, double lambda,
                                        const std::vector<VertexId>& init, const RunCaps& caps, std::uint64_t seed);

inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index) { return hash_combine(master, index); }

}  // namespace cpdg::engine
