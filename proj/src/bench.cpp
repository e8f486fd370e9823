#include "mmdae/bench.hpp"

#include "mmdae/errors.hpp"
#include "mmdae/io.hpp"
#include "mmdae/powerflow.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>

namespace mmdae {

void BenchConfig::validate() const {
  if (solvers.empty()) throw ValidationError("bench: no solvers");
  if (controls.empty()) throw ValidationError("bench: empty control grid");
  for (double c : controls)
    if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("bench: controls must be positive");
  if (runs < 1) throw ValidationError("bench: runs must be at least 1");
  if (adaptive && !reference_h) throw ValidationError("bench: adaptive grids need reference_h");
  if (!(reference_divisor >= 1.0)) throw ValidationError("bench: reference divisor below 1");
  newton.validate();
}

namespace {

StepController controller(const BenchConfig& cfg, double control, double span) {
  if (!cfg.adaptive) return StepController::fixed(control);
  return StepController::adaptive(control, control, std::min(1e-3, span), 1e-8, span);
}

WorkPrecisionRecord run_cell(const DaeProblem& p, const EventSchedule& events, double t0,
                             double tf, const BenchConfig& cfg, StepperKind kind, double control,
                             const Eigen::VectorXd& reference) {
  WorkPrecisionRecord rec;
  rec.solver = to_string(kind);
  rec.control = control;
  rec.runs = cfg.runs;
  IntegrateOptions opts;
  opts.record_all = false;
  double total = 0.0;
  try {
    const StepController ctrl = controller(cfg, control, tf - t0);
    for (int r = 0; r < cfg.runs; ++r) {
      const auto start = std::chrono::steady_clock::now();
      Trajectory traj = integrate(p, t0, tf, kind, ctrl, cfg.newton, events, opts);
      const auto stop = std::chrono::steady_clock::now();
      total += std::chrono::duration<double>(stop - start).count();
      if (r == 0) {
        const Eigen::VectorXd diff = traj.final_state() - reference;
        rec.error = diff.lpNorm<Eigen::Infinity>();
        rec.error_l2 = diff.norm();
        rec.steps_accepted = traj.stats.steps_accepted;
        rec.steps_rejected = traj.stats.steps_rejected;
        rec.newton_iters = traj.stats.newton_iterations;
      }
    }
    rec.mean_time_s = total / cfg.runs;
  } catch (const SolverError& e) {
    rec.error = std::numeric_limits<double>::quiet_NaN();
    rec.error_l2 = rec.error;
    rec.mean_time_s = std::numeric_limits<double>::quiet_NaN();
    rec.note = e.what();
  }
  return rec;
}

}  // namespace

BenchResult bench_work_precision(const DaeProblem& p, const EventSchedule& events, double t0,
                                 double tf, const BenchConfig& cfg) {
  cfg.validate();
  BenchResult result;
  const double hmin = *std::min_element(cfg.controls.begin(), cfg.controls.end());
  result.reference_h = cfg.reference_h ? *cfg.reference_h : hmin / cfg.reference_divisor;

  NewtonConfig ref_newton;
  ref_newton.tol = cfg.reference_tol;
  ref_newton.gamma = cfg.newton.gamma;
  IntegrateOptions opts;
  opts.record_all = false;
  result.reference_final = integrate(p, t0, tf, StepperKind::trapezoid,
                                     StepController::fixed(result.reference_h), ref_newton,
                                     events, opts)
                               .final_state();

  std::vector<double> controls = cfg.controls;
  std::sort(controls.begin(), controls.end(), std::greater<>());
  controls.erase(std::unique(controls.begin(), controls.end()), controls.end());

  std::vector<std::pair<StepperKind, double>> cells;
  for (StepperKind k : cfg.solvers)
    for (double c : controls) cells.emplace_back(k, c);

  result.records.resize(cells.size());
  if (cfg.parallel) {
    std::vector<std::future<WorkPrecisionRecord>> jobs;
    for (const auto& [k, c] : cells)
      jobs.push_back(std::async(std::launch::async, run_cell, std::cref(p), std::cref(events), t0,
                                tf, std::cref(cfg), k, c, std::cref(result.reference_final)));
    for (std::size_t i = 0; i < jobs.size(); ++i) result.records[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < cells.size(); ++i)
      result.records[i] =
          run_cell(p, events, t0, tf, cfg, cells[i].first, cells[i].second, result.reference_final);
  }
  return result;
}

BenchResult bench_work_precision(const SystemCase& c, const BenchConfig& cfg) {
  const auto pf = powerflow::nr_powerflow(c);
  const auto sys = powerflow::init_dynamics(c, pf);
  return bench_work_precision(sys.problem, c.events, 0.0, c.simulation.tf, cfg);
}

void write_bench_csv(const std::vector<WorkPrecisionRecord>& records, std::ostream& out,
                     bool include_timing) {
  out << "solver,control,error,mean_time_s,steps_accepted,steps_rejected,newton_iters,error_l2\n";
  for (const auto& r : records) {
    out << r.solver << ',' << format_double(r.control) << ',' << format_double(r.error) << ','
        << (include_timing ? format_double(r.mean_time_s) : std::string("-")) << ','
        << r.steps_accepted << ',' << r.steps_rejected << ',' << r.newton_iters << ','
        << format_double(r.error_l2) << '\n';
  }
  if (!out) throw Error("bench: write failed");
}

void write_bench_csv(const std::vector<WorkPrecisionRecord>& records,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("bench: cannot open '" + path.string() + "' for writing");
  write_bench_csv(records, out);
}

}  // namespace mmdae
