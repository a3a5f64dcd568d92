#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "evoter/ame.hpp"
#include "evoter/dynamics.hpp"
#include "evoter/errors.hpp"
#include "evoter/graph_io.hpp"
#include "evoter/moments.hpp"
#include "evoter/oracle.hpp"
#include "evoter/pair_approx.hpp"
#include "evoter/stats.hpp"

namespace py = pybind11;
using namespace evoter;

namespace {

OpinionGraph graph_from(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges,
                        const std::vector<Opinion>& opinions) {
  if (opinions.size() != n) throw InvalidInput("need one opinion per vertex");
  OpinionGraph g(n);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) throw InvalidInput("edge endpoint out of range");
    g.add_edge(u, v);
  }
  g.set_opinions(opinions);
  return g;
}

py::dict trajectory_dict(const Trajectory& t) {
  std::vector<std::uint64_t> updates;
  std::vector<double> time;
  std::vector<std::int64_t> n1, n10, n11, n00;
  for (const auto& r : t.rows) {
    updates.push_back(r.updates);
    time.push_back(r.time);
    n1.push_back(r.n1);
    n10.push_back(r.n10);
    n11.push_back(r.n11);
    n00.push_back(r.n00);
  }
  py::dict d;
  d["updates"] = updates;
  d["time"] = time;
  d["N1"] = n1;
  d["N10"] = n10;
  d["N11"] = n11;
  d["N00"] = n00;
  return d;
}

}  // namespace

PYBIND11_MODULE(_evoter, m) {
  m.doc() = "Evolving voter model simulator and analysis toolkit";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);

  py::class_<OpinionGraph>(m, "OpinionGraph")
      .def(py::init(&graph_from), py::arg("n"), py::arg("edges"), py::arg("opinions"))
      .def_property_readonly("vertex_count", &OpinionGraph::vertex_count)
      .def_property_readonly("edge_count", &OpinionGraph::edge_count)
      .def_property_readonly("n1", [](const OpinionGraph& g) { return g.pair_counts().n1; })
      .def_property_readonly("n10", [](const OpinionGraph& g) { return g.pair_counts().n10; })
      .def("edges",
           [](const OpinionGraph& g) {
             std::vector<std::pair<Vertex, Vertex>> out;
             for (const auto& e : g.edges()) out.emplace_back(e.a, e.b);
             return out;
           })
      .def("opinion", &OpinionGraph::opinion)
      .def("triple_counts", [](const OpinionGraph& g) {
        const TripleCounts t = triple_counts(g);
        py::dict d;
        d["N100"] = t.n100();
        d["N010"] = t.n010();
        d["N110"] = t.n110();
        d["N101"] = t.n101();
        d["N011"] = t.n011();
        return d;
      });
  m.def("load_snapshot", [](const std::string& path) { return load_snapshot(path); });
  m.def("save_snapshot",
        [](const std::string& path, const OpinionGraph& g) { save_snapshot(path, g); });

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("n", &ModelParams::n)
      .def_readwrite("L", &ModelParams::L)
      .def_readwrite("nu", &ModelParams::nu)
      .def_readwrite("p", &ModelParams::p)
      .def_readwrite("max_updates", &ModelParams::max_updates)
      .def_readwrite("max_time", &ModelParams::max_time)
      .def_readwrite("stride", &ModelParams::stride)
      .def_readwrite("legacy_rates", &ModelParams::legacy_rates)
      .def_property(
          "clock", [](const ModelParams& p) { return to_string(p.clock); },
          [](ModelParams& p, const std::string& s) { p.clock = parse_clock(s); })
      .def_property(
          "rewire", [](const ModelParams& p) { return to_string(p.rewire_mode); },
          [](ModelParams& p, const std::string& s) { p.rewire_mode = parse_rewire_mode(s); })
      .def_property(
          "target", [](const ModelParams& p) { return to_string(p.target_rule); },
          [](ModelParams& p, const std::string& s) { p.target_rule = parse_target_rule(s); })
      .def_property(
          "initial",
          [](const ModelParams& p) {
            return p.initial_graph == InitialGraph::kRegular ? "regular" : "er";
          },
          [](ModelParams& p, const std::string& s) {
            if (s == "regular") p.initial_graph = InitialGraph::kRegular;
            else if (s == "er") p.initial_graph = InitialGraph::kErdosRenyi;
            else throw InvalidInput("unknown initial graph '" + s + "'");
          })
      .def("validate", &ModelParams::validate);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("absorbed", &RunResult::absorbed)
      .def_readonly("updates", &RunResult::updates)
      .def_readonly("time", &RunResult::time)
      .def_readonly("final_n1", &RunResult::final_n1)
      .def_readonly("final_n10", &RunResult::final_n10)
      .def_readonly("votes", &RunResult::votes)
      .def_readonly("rewires", &RunResult::rewires)
      .def_property_readonly("trajectory",
                             [](const RunResult& r) { return trajectory_dict(r.trajectory); });

  m.def("run", &run, py::arg("params"), py::arg("seed"), py::arg("replica") = 0,
        py::call_guard<py::gil_scoped_release>());
  m.def("initial_graph", &initial_graph, py::arg("params"), py::arg("seed"),
        py::arg("replica") = 0);
  m.def("classify_run", [](const RunResult& r, std::size_t n, double L) {
    return to_string(classify_run(r, n, L));
  });

  py::class_<ArchFit>(m, "ArchFit")
      .def_readonly("A", &ArchFit::A)
      .def_readonly("B", &ArchFit::B)
      .def_readonly("roots", &ArchFit::roots)
      .def_readonly("rms", &ArchFit::rms);
  m.def(
      "fit_arch",
      [](const std::vector<std::pair<double, double>>& xy) {
        std::vector<Point> pts;
        for (const auto& [x, y] : xy) pts.push_back({x, y});
        return fit_arch(pts);
      },
      py::arg("points"));
  m.def(
      "arch_points",
      [](const RunResult& r, double burn_in) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : arch_points(r.trajectory, ArchScale::kEdgeFraction, burn_in)) {
          out.emplace_back(p.x, p.y);
        }
        return out;
      },
      py::arg("result"), py::arg("burn_in") = 0.1);

  py::class_<PaEquilibrium>(m, "PaEquilibrium")
      .def_readonly("J0", &PaEquilibrium::J0)
      .def_readonly("J1", &PaEquilibrium::J1)
      .def_readonly("K0", &PaEquilibrium::K0)
      .def_readonly("K1", &PaEquilibrium::K1)
      .def_readonly("feasible", &PaEquilibrium::feasible);
  m.def("pa_equilibrium", &pa_equilibrium, py::arg("p"), py::arg("nu"), py::arg("L"));
  m.def("pa_nu_c", &pa_nu_c, py::arg("p"));

  py::class_<MomentState>(m, "MomentState")
      .def_readonly("Ua", &MomentState::Ua)
      .def_readonly("Ub", &MomentState::Ub)
      .def_readonly("Uaa", &MomentState::Uaa)
      .def_readonly("Uab", &MomentState::Uab)
      .def_readonly("Ubb", &MomentState::Ubb)
      .def_readonly("bar_alpha", &MomentState::bar_alpha)
      .def_readonly("bar_beta", &MomentState::bar_beta)
      .def_readonly("bar_eta", &MomentState::bar_eta);
  m.def("derive_from_Ub", &derive_from_Ub, py::arg("Ub"), py::arg("nu"));
  m.def("empirical_moments", &empirical_moments, py::arg("graph"), py::arg("L"),
        py::arg("nu") = 0.0);

  py::class_<AmeParams>(m, "AmeParams")
      .def(py::init([](double alpha, double beta, double eta, double nu, double p) {
             auto a = AmeParams::symmetric(alpha, beta, eta, nu, p);
             a.validate();
             return a;
           }),
           py::arg("alpha"), py::arg("beta"), py::arg("eta"), py::arg("nu"), py::arg("p") = 0.5)
      .def_readwrite("bar_delta", &AmeParams::bar_delta)
      .def_readwrite("bar_eps", &AmeParams::bar_eps);
  m.def("ame_fixed_point", [](int plane, const AmeParams& a) {
    const Vec2 z = fixed_point(plane, a);
    return std::pair{z(0), z(1)};
  });
  m.def("ame_eigenvalues", [](int plane, const AmeParams& a) {
    const PlaneSystem s = plane_system(plane, a);
    return std::pair{s.lambda1, s.lambda2};
  });
  m.def(
      "backward_distances",
      [](const AmeParams& a, Seed seed, int cycles, std::pair<double, double> z,
         std::pair<double, double> w) {
        return backward_iterate(a, seed, cycles, Vec2(z.first, z.second),
                                Vec2(w.first, w.second))
            .distance;
      },
      py::arg("params"), py::arg("seed"), py::arg("cycles"), py::arg("z"), py::arg("w"));

  m.def(
      "drift",
      [](const OpinionGraph& g, double nu, double L, const std::string& mode) {
        const DriftReport r = enumerate_drift(g, nu, L, parse_drift_mode(mode));
        py::dict d;
        d["formula"] = r.formula;
        d["enumerated"] = r.enumerated;
        d["omitted"] = r.omitted;
        d["exact_match"] = r.exact && r.enumerated_exact == r.formula_exact;
        d["max_relative_gap"] = r.max_relative_gap;
        d["identity_sum_ok"] = verify_identity_sum(r);
        return d;
      },
      py::arg("graph"), py::arg("nu"), py::arg("L"), py::arg("mode") = "idealized_target");

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a command-line subcommand; returns (exit code, stdout, stderr).");
}
