#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cpdg/cli.hpp"
#include "cpdg/closedform.hpp"
#include "cpdg/config.hpp"
#include "cpdg/engine.hpp"
#include "cpdg/experiments.hpp"
#include "cpdg/graph.hpp"
#include "cpdg/kernels.hpp"
#include "cpdg/lyapunov.hpp"
#include "cpdg/oracle.hpp"
#include "cpdg/version.hpp"

namespace py = pybind11;
using namespace cpdg;

namespace {

py::dict record_dict(const engine::TrajectoryRecord& r) {
  py::dict d;
  d["extinct"] = r.extinct;
  d["time"] = r.time;
  d["censor"] = engine::to_string(r.censor);
  d["root_reinfection_times"] = r.root_reinfection_times;
  d["peak_infected"] = r.peak_infected;
  d["total_events"] = r.total_events;
  d["infections"] = r.infections;
  d["recoveries"] = r.recoveries;
  d["target_hit_time"] = r.target_hit_time;
  d["seed"] = r.seed;
  return d;
}

std::uint32_t mask_of(const std::vector<graph::VertexId>& init) {
  std::uint32_t m = 0;
  for (auto v : init) m |= 1u << v;
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Contact process on dynamical graphs";
  m.attr("__version__") = kVersion;

  py::class_<graph::GraphView>(m, "Graph")
      .def_static("complete", &graph::complete_graph, py::arg("n"))
      .def_static("star", &graph::star_graph, py::arg("leaves"))
      .def_static("path", &graph::path_graph, py::arg("vertices"))
      .def_static("regular_tree", &graph::regular_tree, py::arg("degree"), py::arg("depth"))
      .def_static("path_with_leaves", &graph::path_with_leaves, py::arg("degrees"))
      .def_static("from_edges", [](const std::vector<std::pair<graph::VertexId, graph::VertexId>>& e) {
        return graph::build_finite(e);
      })
      .def_static("read", &graph::read_graph_file, py::arg("path"))
      .def_static("parse", [](const std::string& text) {
        std::istringstream is(text);
        return graph::read_graph(is);
      })
      .def_property_readonly("num_vertices", &graph::GraphView::num_vertices)
      .def_property_readonly("num_edges", &graph::GraphView::num_edges)
      .def("degree", &graph::GraphView::degree)
      .def("edges", [](const graph::GraphView& g) {
        std::vector<std::pair<graph::VertexId, graph::VertexId>> out;
        for (graph::EdgeId e = 0; e < g.num_edges(); ++e) out.push_back(g.endpoints(e));
        return out;
      })
      .def("dump", [](const graph::GraphView& g) {
        std::ostringstream os;
        g.write(os);
        return os.str();
      });

  py::class_<kernels::KernelSpec>(m, "Kernel")
      .def_static("sigma", &kernels::KernelSpec::sigma_kernel, py::arg("alpha"), py::arg("sigma"),
                  py::arg("kappa") = 1.0, py::arg("eta") = 0.0, py::arg("nu") = 1.0)
      .def_static("constant", &kernels::KernelSpec::constant_p, py::arg("p"), py::arg("eta") = 0.0,
                  py::arg("nu") = 1.0)
      .def("p", &kernels::KernelSpec::p)
      .def("v", &kernels::KernelSpec::v)
      .def("__repr__", &kernels::KernelSpec::describe);

  m.def("transmission_prob", &closedform::transmission_prob, py::arg("lam"), py::arg("v"), py::arg("p"));
  m.def("edge_law", [](double lam, double v, double p) {
    const auto e = closedform::make_edge_law(lam, v, p);
    return py::dict(py::arg("a") = e.a, py::arg("b") = e.b, py::arg("mean_time") = closedform::transmission_time_mean(e));
  });
  m.def("transmission_time_tail", [](double lam, double v, double p, double t) {
    return closedform::transmission_time_tail(closedform::make_edge_law(lam, v, p), t);
  });
  m.def("lower_bound_rate", &closedform::lower_bound_rate);
  m.def("bg_transition", &closedform::bg_transition, py::arg("p"), py::arg("v"), py::arg("open_now"), py::arg("s"));
  m.def("geom_exp_laplace", &closedform::geom_exp_laplace);
  m.def("path_lower_bound", [](const std::vector<std::uint32_t>& degrees, double lam, const kernels::KernelSpec& k) {
    return closedform::path_lower_bound(degrees, lam, k).bound;
  });
  m.def("phase_classify", [](double alpha, double sigma, double eta, const std::string& tail, double param,
                             bool zeta_zero) {
    closedform::TailSpec t;
    t.kind = tail == "stretched" ? closedform::TailSpec::Kind::Stretched : closedform::TailSpec::Kind::PowerLaw;
    t.param = param;
    const auto r = closedform::phase_classify(alpha, sigma, eta, t, zeta_zero);
    return py::dict(py::arg("phase") = closedform::to_string(r.phase), py::arg("rule") = r.rule,
                    py::arg("lambda2_finite") = r.lambda2_finite);
  }, py::arg("alpha"), py::arg("sigma"), py::arg("eta"), py::arg("tail") = "power", py::arg("param") = 2.5,
     py::arg("zeta_zero") = false);

  m.def("run_replica", [](graph::GraphView g, const kernels::KernelSpec& k, double lam,
                          const std::vector<graph::VertexId>& init, double horizon, std::uint64_t seed,
                          const std::string& variant) {
    return record_dict(engine::run_replica(g, k, lam, engine::parse_variant(variant), init,
                                           engine::RunCaps{horizon, ~std::uint64_t{0}}, seed));
  }, py::arg("graph"), py::arg("kernel"), py::arg("lam"), py::arg("init"), py::arg("horizon") = 1e300,
     py::arg("seed") = 0, py::arg("variant") = "cpdg");
  m.def("run_coupled", [](graph::GraphView g, const kernels::KernelSpec& k, double lam,
                          const std::vector<graph::VertexId>& small, const std::vector<graph::VertexId>& big,
                          std::uint64_t seed) {
    return engine::run_coupled(g, k, lam, small, big, {}, seed).violation;
  });
  m.def("run_waitandsee_dominating", [](graph::GraphView g, const kernels::KernelSpec& k, double lam,
                                        const std::vector<graph::VertexId>& init, std::uint64_t seed) {
    return engine::run_waitandsee_dominating(g, k, lam, init, {}, seed).violation;
  });

  m.def("oracle_extinction", [](const graph::GraphView& g, const kernels::KernelSpec& k, double lam,
                                const std::vector<graph::VertexId>& init) {
    const auto model = oracle::build_exact(g, k, lam);
    const auto s = oracle::extinction_stats(model, oracle::initial_distribution(model, mask_of(init)));
    return py::dict(py::arg("p_extinct") = s.p_extinct, py::arg("mean_time") = s.mean_time,
                    py::arg("states") = model.states);
  });
  m.def("oracle_alive", [](const graph::GraphView& g, const kernels::KernelSpec& k, double lam,
                           const std::vector<graph::VertexId>& init, double t) {
    const auto model = oracle::build_exact(g, k, lam);
    return oracle::transient_prob(model, oracle::initial_distribution(model, mask_of(init)), t,
                                  [](std::uint32_t c, std::uint32_t) { return c != 0; });
  });

  m.def("check_conditions", [](const graph::GraphView& g, const kernels::KernelSpec& k, const std::string& weight,
                               double beta, double lam) {
    const auto W = weight == "power" ? lyapunov::WeightFunction::power(beta)
                   : weight == "one" ? lyapunov::WeightFunction::constant_one()
                                     : lyapunov::WeightFunction::linear();
    const auto r = lyapunov::check_conditions(g, k, W, lam);
    return py::dict(py::arg("K") = r.K, py::arg("v_min") = r.v_min, py::arg("theta") = r.theta,
                    py::arg("lambda_star") = r.lambda_star);
  }, py::arg("graph"), py::arg("kernel"), py::arg("weight") = "linear", py::arg("beta") = 1.0, py::arg("lam") = 0.0);

  m.def("tail_exponent", [](const std::vector<double>& x) {
    const auto t = kernels::tail_exponent_estimate(x);
    return py::dict(py::arg("exponent") = t.exponent, py::arg("reliable") = t.reliable,
                    py::arg("tail_points") = t.tail_points, py::arg("reason") = t.reason);
  });
  m.def("sample_zeta_p", [](const std::string& kind, double param, const kernels::KernelSpec& k, std::size_t n,
                            std::uint64_t seed) {
    graph::OffspringDistribution d = kind == "power_law" ? graph::OffspringDistribution::power_law(param)
                                     : kind == "geometric" ? graph::OffspringDistribution::geometric(param)
                                                           : graph::OffspringDistribution::stretched_exponential(param);
    kernels::PercolatedOffspring pd{d, k};
    Rng rng(seed);
    std::vector<std::uint64_t> out(n);
    for (auto& x : out) x = kernels::sample_zeta_p(pd, rng);
    return out;
  });

  m.def("parse_config", [](const std::string& text) {
    try {
      const auto c = config::parse_config(text);
      return py::dict(py::arg("ok") = true, py::arg("hash") = c.hash_hex(), py::arg("canonical") = c.canonical,
                      py::arg("lambda") = c.lambda);
    } catch (const config::ConfigError& e) {
      return py::dict(py::arg("ok") = false, py::arg("violations") = e.violations);
    }
  });
  m.def("run_command", [](const std::string& cmd, const std::string& config_text, const std::string& out_dir,
                          unsigned threads) {
    const auto c = config::parse_config(config_text);
    cli::Flags f;
    f.out_dir = out_dir;
    f.threads = threads;
    std::ostringstream os;
    int code;
    {
      py::gil_scoped_release nogil;
      code = cli::dispatch(cmd, c, f, os);
    }
    return py::make_tuple(code, os.str());
  }, py::arg("command"), py::arg("config_text"), py::arg("out_dir"), py::arg("threads") = 1);
}
