#include "mmdae/bench.hpp"
#include "mmdae/case.hpp"
#include "mmdae/dae.hpp"
#include "mmdae/errors.hpp"
#include "mmdae/io.hpp"
#include "mmdae/powerflow.hpp"
#include "mmdae/solvers.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace mmdae;

namespace {

StepController controller(std::optional<double> h, std::optional<double> rtol,
                          std::optional<double> atol) {
  if (rtol || atol) {
    if (h) throw ValidationError("give either h or rtol/atol, not both");
    return StepController::adaptive(rtol.value_or(1e-4), atol.value_or(1e-6));
  }
  return StepController::fixed(h.value_or(1e-3));
}

NewtonConfig newton(double tol, std::optional<double> gamma) {
  NewtonConfig cfg;
  cfg.tol = tol;
  cfg.gamma = gamma;
  cfg.validate();
  return cfg;
}

Eigen::MatrixXd stacked_rows(const Trajectory& t) {
  const Eigen::Index cols = t.values.empty() ? 0 : t.values.front().size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(t.size()), cols);
  for (std::size_t k = 0; k < t.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = t.values[k];
  return out;
}

}  // namespace

PYBIND11_MODULE(_mmdae, m) {
  m.doc() = "Mass-matrix DAE transient-stability engine";

  // Later registrations are tried first, so bases go in before subclasses.
  auto error = py::register_exception<Error>(m, "Error");
  auto invalid = py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", invalid.ptr());
  py::register_exception<EvaluationError>(m, "EvaluationError", error.ptr());
  py::register_exception<SolverError>(m, "SolverError", error.ptr());

  py::class_<SystemCase>(m, "SystemCase")
      .def_readonly("name", &SystemCase::name)
      .def_readonly("base_mva", &SystemCase::base_mva)
      .def_property_readonly("bus_ids",
                             [](const SystemCase& c) {
                               std::vector<int> ids;
                               for (const auto& b : c.buses) ids.push_back(b.id);
                               return ids;
                             })
      .def_property_readonly("line_ids",
                             [](const SystemCase& c) {
                               std::vector<std::string> ids;
                               for (const auto& l : c.lines) ids.push_back(l.id);
                               return ids;
                             })
      .def_property_readonly("generator_ids",
                             [](const SystemCase& c) {
                               std::vector<std::string> ids;
                               for (const auto& g : c.generators) ids.push_back(g.params.id);
                               return ids;
                             })
      .def_property_readonly("events",
                             [](const SystemCase& c) {
                               std::vector<std::tuple<std::string, double, std::string>> out;
                               for (const auto& e : c.events.events)
                                 out.emplace_back(e.id, e.time, e.target);
                               return out;
                             })
      .def_property_readonly("tf", [](const SystemCase& c) { return c.simulation.tf; })
      .def("__repr__", [](const SystemCase& c) {
        std::ostringstream os;
        os << "<SystemCase '" << c.name << "': " << c.buses.size() << " buses, "
           << c.generators.size() << " generators>";
        return os.str();
      });

  m.def("load_case", &load_case, py::arg("path"));
  m.def("parse_case", [](const std::string& text) { return parse_case(text); }, py::arg("text"));

  py::class_<powerflow::PowerFlowSolution>(m, "PowerFlowSolution")
      .def_readonly("bus_ids", &powerflow::PowerFlowSolution::bus_ids)
      .def_readonly("vm", &powerflow::PowerFlowSolution::vm)
      .def_readonly("va", &powerflow::PowerFlowSolution::va)
      .def_readonly("iterations", &powerflow::PowerFlowSolution::iterations)
      .def_readonly("mismatch", &powerflow::PowerFlowSolution::mismatch)
      .def_readonly("mismatch_history", &powerflow::PowerFlowSolution::mismatch_history)
      .def_readonly("generator_power", &powerflow::PowerFlowSolution::generator_power);

  m.def("nr_powerflow", &powerflow::nr_powerflow, py::arg("case"), py::arg("tol") = 1e-8,
        py::arg("max_iter") = 20);

  py::class_<ConsistencyReport>(m, "ConsistencyReport")
      .def_readonly("f_norm", &ConsistencyReport::f_norm)
      .def_readonly("g_norm", &ConsistencyReport::g_norm)
      .def_readonly("worst_f", &ConsistencyReport::worst_f)
      .def_readonly("worst_g", &ConsistencyReport::worst_g)
      .def_readonly("passed", &ConsistencyReport::pass);

  py::class_<DaeProblem>(m, "DaeProblem")
      .def_property_readonly("n", &DaeProblem::n)
      .def_property_readonly("m", &DaeProblem::m)
      .def_property_readonly("names", [](const DaeProblem& p) { return p.layout().names(); })
      .def_property_readonly("mass", [](const DaeProblem& p) { return p.mass().entries; })
      .def_property_readonly("mass_rank", [](const DaeProblem& p) { return mass_rank(p.mass()); })
      .def_property_readonly("z0", [](const DaeProblem& p) { return p.initial().stacked(); })
      .def_property_readonly("u0", [](const DaeProblem& p) { return p.initial().u; })
      .def_property_readonly("warnings", &DaeProblem::warnings)
      .def("index", [](const DaeProblem& p, const std::string& name) { return p.layout().at(name); })
      .def(
          "residual",
          [](const DaeProblem& p, const Eigen::VectorXd& z, std::optional<Eigen::VectorXd> u,
             double t) { return p.residual(z, u ? *u : p.initial().u, t); },
          py::arg("z"), py::arg("u") = py::none(), py::arg("t") = 0.0)
      .def(
          "jacobian",
          [](const DaeProblem& p, const Eigen::VectorXd& z, std::optional<Eigen::VectorXd> u,
             double t) { return p.jacobian(z, u ? *u : p.initial().u, t); },
          py::arg("z"), py::arg("u") = py::none(), py::arg("t") = 0.0)
      .def("consistency", [](const DaeProblem& p, double tol) { return check_consistency(p, tol); },
           py::arg("tol") = 1e-6);

  m.def("to_traditional", &to_traditional, py::arg("problem"));

  py::class_<powerflow::DynamicSystem>(m, "DynamicSystem")
      .def_readonly("problem", &powerflow::DynamicSystem::problem)
      .def_readonly("report", &powerflow::DynamicSystem::report);

  m.def("init_dynamics", &powerflow::init_dynamics, py::arg("case"), py::arg("pf"),
        py::arg("tol") = 1e-6);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("names", &Trajectory::names)
      .def_readonly("times", &Trajectory::times)
      .def_property_readonly("values", &stacked_rows)
      .def_property_readonly("events",
                             [](const Trajectory& t) {
                               std::vector<std::pair<double, std::string>> out;
                               for (const auto& e : t.events) out.emplace_back(e.time, e.id);
                               return out;
                             })
      .def_property_readonly("steps_accepted", [](const Trajectory& t) { return t.stats.steps_accepted; })
      .def_property_readonly("steps_rejected", [](const Trajectory& t) { return t.stats.steps_rejected; })
      .def_property_readonly("newton_iterations",
                             [](const Trajectory& t) { return t.stats.newton_iterations; })
      .def("__len__", &Trajectory::size)
      .def("to_csv", [](const Trajectory& t, const std::filesystem::path& path) {
        write_trajectory_csv(t, path);
      });

  m.def(
      "integrate",
      [](const DaeProblem& p, double t0, double tf, const std::string& solver,
         std::optional<double> h, std::optional<double> rtol, std::optional<double> atol,
         double newton_tol, std::optional<double> gamma, const SystemCase* events_from) {
        const EventSchedule events = events_from ? events_from->events : EventSchedule{};
        py::gil_scoped_release release;
        return integrate(p, t0, tf, parse_stepper(solver), controller(h, rtol, atol),
                         newton(newton_tol, gamma), events);
      },
      py::arg("problem"), py::arg("t0") = 0.0, py::arg("tf") = 1.0, py::arg("solver") = "trap",
      py::arg("h") = py::none(), py::arg("rtol") = py::none(), py::arg("atol") = py::none(),
      py::arg("newton_tol") = 1e-8, py::arg("gamma") = py::none(),
      py::arg("events_from") = py::none());

  m.def(
      "bench",
      [](const SystemCase& c, std::vector<std::string> solvers, std::vector<double> controls,
         int runs, bool parallel) {
        BenchConfig cfg;
        cfg.solvers.clear();
        for (const auto& s : solvers) cfg.solvers.push_back(parse_stepper(s));
        cfg.controls = std::move(controls);
        cfg.runs = runs;
        cfg.parallel = parallel;
        BenchResult r;
        {
          py::gil_scoped_release release;
          r = bench_work_precision(c, cfg);
        }
        py::list out;
        for (const auto& rec : r.records) {
          py::dict d;
          d["solver"] = rec.solver;
          d["control"] = rec.control;
          d["error"] = rec.error;
          d["error_l2"] = rec.error_l2;
          d["mean_time_s"] = rec.mean_time_s;
          d["steps_accepted"] = rec.steps_accepted;
          d["steps_rejected"] = rec.steps_rejected;
          d["newton_iters"] = rec.newton_iters;
          d["note"] = rec.note;
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("case"), py::arg("solvers") = std::vector<std::string>{"ie", "trap", "bdf2"},
      py::arg("controls") = std::vector<double>{4e-3, 2e-3, 1e-3, 5e-4}, py::arg("runs") = 5,
      py::arg("parallel") = false);
}
