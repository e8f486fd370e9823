#include "mmdae/bench.hpp"
#include "mmdae/case.hpp"
#include "mmdae/errors.hpp"
#include "mmdae/io.hpp"
#include "mmdae/powerflow.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>

namespace {

using namespace mmdae;

struct Options {
  std::string case_path;
  std::string solver;
  std::string formulation = "mass";
  std::optional<double> h;
  std::optional<double> rtol, atol;
  std::string gamma = "h";
  std::optional<double> tf;
  std::string output;
  std::vector<std::string> solvers{"ie", "trap", "bdf2"};
  std::vector<double> h_grid{4e-3, 2e-3, 1e-3, 5e-4};
  int runs = 5;
  long seed = 0;
  bool parallel = false;
  double pf_tol = 1e-8;
};

NewtonConfig newton_from(const Options& o) {
  NewtonConfig cfg;
  if (o.gamma != "h") {
    try {
      std::size_t used = 0;
      cfg.gamma = std::stod(o.gamma, &used);
      if (used != o.gamma.size()) throw std::invalid_argument(o.gamma);
    } catch (const std::logic_error&) {
      throw ValidationError("--gamma must be 'h' or a number");
    }
  }
  cfg.validate();
  return cfg;
}

int cmd_powerflow(const Options& o) {
  const SystemCase c = load_case(o.case_path);
  const auto pf = powerflow::nr_powerflow(c, o.pf_tol);
  std::printf("case %s: converged in %d iterations, mismatch %.3e\n", c.name.c_str(),
              pf.iterations, pf.mismatch);
  std::printf("%6s %12s %12s\n", "bus", "V (pu)", "theta (deg)");
  for (std::size_t i = 0; i < pf.bus_ids.size(); ++i)
    std::printf("%6d %12.6f %12.6f\n", pf.bus_ids[i], pf.vm[i], pf.va[i] * 180.0 / std::numbers::pi);
  std::printf("%6s %12s %12s\n", "gen", "P (pu)", "Q (pu)");
  for (std::size_t k = 0; k < c.generators.size(); ++k)
    std::printf("%6s %12.6f %12.6f\n", c.generators[k].params.id.c_str(),
                pf.generator_power[k].real(), pf.generator_power[k].imag());
  return 0;
}

// A shorter horizon drops the events it no longer reaches.
void override_tf(SystemCase& c, double tf) {
  c.simulation.tf = tf;
  auto& ev = c.events.events;
  const auto cut = std::remove_if(ev.begin(), ev.end(), [&](const Event& e) { return e.time > tf; });
  for (auto it = cut; it != ev.end(); ++it)
    std::cerr << "note: event '" << it->id << "' at t=" << it->time << " lies past --tf; skipped\n";
  ev.erase(cut, ev.end());
  c.validate();
}

int cmd_run(const Options& o) {
  SystemCase c = load_case(o.case_path);
  if (o.tf) override_tf(c, *o.tf);
  const double tf = c.simulation.tf;
  const StepperKind kind = parse_stepper(o.solver.empty() ? c.simulation.solver : o.solver);
  const NewtonConfig newton = newton_from(o);

  StepController ctrl;
  if (o.rtol || o.atol) {
    if (o.h) throw ValidationError("--h cannot be combined with --rtol/--atol");
    const double rtol = o.rtol.value_or(o.atol.value_or(1e-3));
    const double atol = o.atol.value_or(rtol);
    ctrl = StepController::adaptive(rtol, atol, std::min(1e-3, tf), 1e-8, tf);
  } else {
    ctrl = StepController::fixed(o.h.value_or(c.simulation.h));
  }

  const auto pf = powerflow::nr_powerflow(c, o.pf_tol);
  auto sys = powerflow::init_dynamics(c, pf);
  DaeProblem problem = sys.problem;
  if (o.formulation == "traditional") {
    problem = to_traditional(problem);
  } else if (o.formulation != "mass") {
    throw ValidationError("--formulation must be 'mass' or 'traditional'");
  }
  for (const auto& w : problem.warnings()) std::cerr << "warning: " << w << '\n';

  const Trajectory traj = integrate(problem, 0.0, tf, kind, ctrl, newton, c.events);
  if (o.output.empty()) {
    write_trajectory_csv(traj, std::cout);
  } else {
    write_trajectory_csv(traj, o.output);
  }
  std::cerr << "steps " << traj.stats.steps_accepted << " accepted, "
            << traj.stats.steps_rejected << " rejected, " << traj.stats.newton_iterations
            << " Newton iterations\n";
  return 0;
}

int cmd_bench(const Options& o) {
  SystemCase c = load_case(o.case_path);
  if (o.tf) override_tf(c, *o.tf);
  BenchConfig cfg;
  cfg.solvers.clear();
  for (const auto& s : o.solvers) cfg.solvers.push_back(parse_stepper(s));
  cfg.controls = o.h_grid;
  cfg.runs = o.runs;
  cfg.parallel = o.parallel;
  cfg.newton = newton_from(o);
  const BenchResult result = bench_work_precision(c, cfg);
  if (o.output.empty()) {
    write_bench_csv(result.records, std::cout);
  } else {
    write_bench_csv(result.records, o.output);
  }
  for (const auto& r : result.records)
    if (!r.note.empty())
      std::cerr << "warning: " << r.solver << " at " << r.control << " failed: " << r.note << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mass-matrix DAE transient stability simulator"};
  app.require_subcommand(1);
  Options o;

  auto* pf = app.add_subcommand("powerflow", "Solve the AC power flow and print the result");
  pf->add_option("--case", o.case_path, "Case file")->required()->check(CLI::ExistingFile);
  pf->add_option("--tol", o.pf_tol, "Mismatch tolerance");

  auto* run = app.add_subcommand("run", "Integrate a case and write the trajectory CSV");
  run->set_help_flag("--help", "Print this help message and exit");
  run->add_option("--case", o.case_path, "Case file")->required()->check(CLI::ExistingFile);
  run->add_option("--solver", o.solver, "ie | trap | bdf2");
  run->add_option("--formulation", o.formulation, "mass | traditional");
  auto* h_opt = run->add_option("--h", o.h, "Fixed step size (s)");
  run->add_option("--rtol", o.rtol, "Relative tolerance (adaptive)")->excludes(h_opt);
  run->add_option("--atol", o.atol, "Absolute tolerance (adaptive)")->excludes(h_opt);
  run->add_option("--gamma", o.gamma, "Algebraic row scaling: h or a number");
  run->add_option("--tf", o.tf, "Final time (s)");
  run->add_option("--output", o.output, "Output CSV (stdout if omitted)");

  auto* bench = app.add_subcommand("bench", "Work-precision sweep");
  bench->add_option("--case", o.case_path, "Case file")->required()->check(CLI::ExistingFile);
  bench->add_option("--solvers", o.solvers, "Comma-separated steppers")->delimiter(',');
  bench->add_option("--h-grid", o.h_grid, "Comma-separated step sizes")->delimiter(',');
  bench->add_option("--runs", o.runs, "Timing repetitions per cell");
  bench->add_option("--seed", o.seed, "Reserved");
  bench->add_option("--gamma", o.gamma, "Algebraic row scaling: h or a number");
  bench->add_option("--tf", o.tf, "Final time (s)");
  bench->add_option("--output", o.output, "Output CSV (stdout if omitted)");
  bench->add_flag("--parallel-bench", o.parallel, "Run grid cells concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*pf) return cmd_powerflow(o);
    if (*run) return cmd_run(o);
    return cmd_bench(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
