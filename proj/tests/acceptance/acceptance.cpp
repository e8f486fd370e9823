// Acceptance checks. One line per criterion; exit status is nonzero if any fail.

#include "mmdae/bench.hpp"
#include "mmdae/blocks.hpp"
#include "mmdae/case.hpp"
#include "mmdae/dae.hpp"
#include "mmdae/errors.hpp"
#include "mmdae/powerflow.hpp"
#include "mmdae/solvers.hpp"

#include "../support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace mmdae;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string joined(const std::ostringstream& os) {
  std::string s = os.str();
  while (!s.empty() && (s.back() == ' ' || s.back() == ';')) s.pop_back();
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double max_row_diff(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a.times[k] != b.times[k]) return INFINITY;
    worst = std::max(worst, (a.values[k] - b.values[k]).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

NewtonConfig tight() {
  NewtonConfig cfg;
  cfg.tol = 1e-10;
  return cfg;
}

// Shared 5 s trip/reconnect run on the bundled two-area case.
struct KundurRun {
  SystemCase c;
  powerflow::DynamicSystem sys;
  Trajectory traj;
  double seconds = 0.0;
};

KundurRun& kundur_run() {
  static KundurRun run = [] {
    KundurRun r{oracle::bundled("kundur_two_area"), {}, {}, 0.0};
    r.sys = oracle::initialized(r.c);
    const auto start = std::chrono::steady_clock::now();
    r.traj = integrate(r.sys.problem, 0.0, 5.0, StepperKind::trapezoid,
                       StepController::fixed(1e-3), tight(), r.c.events);
    r.seconds = seconds_since(start);
    return r;
  }();
  return run;
}

Outcome formulation_equivalence() {
  auto& run = kundur_run();
  const auto start = std::chrono::steady_clock::now();
  const DaeProblem trad = to_traditional(run.sys.problem);
  const Trajectory other = integrate(trad, 0.0, 5.0, StepperKind::trapezoid,
                                     StepController::fixed(1e-3), tight(), run.c.events);
  const double elapsed = run.seconds + seconds_since(start);
  const double diff = max_row_diff(run.traj, other);
  return {diff <= 1e-8 && elapsed <= 60.0,
          "max diff " + fmt(diff) + " over " + std::to_string(run.traj.size()) + " rows, " +
              fmt(elapsed) + " s for both runs"};
}

Outcome gamma_invariance() {
  auto& run = kundur_run();
  NewtonConfig unit = tight();
  unit.gamma = 1.0;
  const Trajectory other = integrate(run.sys.problem, 0.0, 5.0, StepperKind::trapezoid,
                                     StepController::fixed(1e-3), unit, run.c.events);
  const double diff = max_row_diff(run.traj, other);
  return {diff <= 1e-7, "max diff gamma=h vs gamma=1: " + fmt(diff)};
}

Outcome convergence_orders() {
  const auto sys = oracle::initialized("two_machine");
  const DaeProblem& p = sys.problem;
  Eigen::VectorXd z = p.initial().stacked();
  z[p.layout().at("G1.omega")] += 1e-3;
  z = reconcile_algebraic(p, z, p.initial().u, 0.0, tight());
  InitialCondition ic = p.initial();
  ic.x = z.head(static_cast<Eigen::Index>(p.n()));
  ic.y = z.tail(static_cast<Eigen::Index>(p.m()));
  IntegrateOptions opts;
  opts.record_all = false;
  opts.initial = ic;

  const std::vector<double> hs{4e-3, 2e-3, 1e-3};
  NewtonConfig ref_cfg;
  ref_cfg.tol = 1e-12;
  const Eigen::VectorXd ref = integrate(p, 0.0, 1.0, StepperKind::trapezoid,
                                        StepController::fixed(1e-3 / 64.0), ref_cfg, {}, opts)
                                  .final_state();
  bool ok = true;
  std::ostringstream os;
  for (StepperKind k : {StepperKind::implicit_euler, StepperKind::trapezoid, StepperKind::bdf2}) {
    std::vector<double> err;
    for (double h : hs) {
      const auto traj = integrate(p, 0.0, 1.0, k, StepController::fixed(h), ref_cfg, {}, opts);
      err.push_back((traj.final_state() - ref).lpNorm<Eigen::Infinity>());
    }
    const double order = oracle::observed_order(hs, err);
    const bool in_band = order_of(k) == 1 ? (order >= 0.9 && order <= 1.1)
                                          : (order >= 1.8 && order <= 2.2);
    ok = ok && in_band;
    os << to_string(k) << " " << fmt(order) << (in_band ? "" : " (out of band)") << "; ";
  }
  return {ok, joined(os)};
}

Outcome model_reduction() {
  const SystemCase base = oracle::bundled("kundur_two_area");
  const int n = static_cast<int>(oracle::initialized(base).problem.n());
  bool ok = true;
  std::ostringstream os;
  os << "n = " << n << ", rank by k:";
  for (std::size_t k = 0; k <= base.generators.size(); ++k) {
    SystemCase c = base;
    for (std::size_t g = 0; g < k; ++g) {
      c.generators[g].params.td20 = 0.0;
      c.generators[g].params.tq20 = 0.0;
    }
    const int rank = mass_rank(oracle::initialized(c).problem.mass());
    ok = ok && rank == n - 2 * static_cast<int>(k);
    os << " " << rank;
  }

  const SystemCase reduced = oracle::bundled("kundur_reduced");
  const auto sys = oracle::initialized(reduced);
  const DaeProblem& p = sys.problem;
  std::vector<int> rows;
  for (std::size_t i = 0; i < p.n(); ++i)
    if (p.mass().entries[i] == 0.0) rows.push_back(static_cast<int>(i));
  double worst = 0.0;
  bool finished = false;
  try {
    const auto traj = integrate(p, 0.0, reduced.simulation.tf, StepperKind::trapezoid,
                                StepController::fixed(1e-3), NewtonConfig{}, reduced.events);
    finished = traj.times.back() == reduced.simulation.tf;
    // u at each row: status after every event up to and including that time.
    Eigen::VectorXd u = p.initial().u;
    std::size_t next = 0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const double t = traj.times[k];
      // Pre-event rows are evaluated with the status they were solved under.
      while (next < reduced.events.events.size() && reduced.events.events[next].time < t)
        apply_discrete_event(p, reduced.events.events[next++], u);
      const Eigen::VectorXd r = p.residual(traj.values[k], u, t);
      for (int i : rows) worst = std::max(worst, std::abs(r[i]));
    }
  } catch (const SolverError& e) {
    os << " solver failed: " << e.what();
  }
  ok = ok && finished && worst <= 1e-8 && rows.size() == 4;
  os << "; reduced run " << (finished ? "completed" : "incomplete") << ", worst e'' residual "
     << fmt(worst);
  return {ok, os.str()};
}

DaeProblem source_chain(std::shared_ptr<Component> block) {
  return assemble_problem(
      {std::make_shared<blocks::SineSource>("src", 1.0, 0.5, 0.7), std::move(block)});
}

Trajectory run_chain(const DaeProblem& p) {
  return integrate(p, 0.0, 3.0, StepperKind::trapezoid, StepController::fixed(1e-2),
                   NewtonConfig{}, {});
}

Outcome block_degenerations() {
  using blocks::Input;
  const double gain = 2.5;
  const auto lag0 = source_chain(std::make_shared<blocks::LagComponent>(
      "lag", blocks::LagBlock{gain, 0.0}, Input::of("src.u")));
  double worst_lag = 0.0;
  {
    const auto traj = run_chain(lag0);
    const int y = lag0.layout().at("lag.y"), u = lag0.layout().at("src.u");
    for (const auto& row : traj.values) worst_lag = std::max(worst_lag, std::abs(row[y] - gain * row[u]));
  }

  const auto equal = source_chain(std::make_shared<blocks::LeadLagComponent>(
      "ll", blocks::LeadLagBlock{0.4, 0.4}, Input::of("src.u")));
  double worst_equal = 0.0;
  {
    const auto traj = run_chain(equal);
    const int y = equal.layout().at("ll.y"), u = equal.layout().at("src.u");
    for (const auto& row : traj.values) worst_equal = std::max(worst_equal, std::abs(row[y] - row[u]));
  }

  const auto pure_lag = source_chain(std::make_shared<blocks::LeadLagComponent>(
      "ll", blocks::LeadLagBlock{0.0, 0.4}, Input::of("src.u")));
  const auto lag = source_chain(std::make_shared<blocks::LagComponent>(
      "lag", blocks::LagBlock{1.0, 0.4}, Input::of("src.u")));
  double worst_pair = 0.0;
  {
    const auto a = run_chain(pure_lag);
    const auto b = run_chain(lag);
    const int ya = pure_lag.layout().at("ll.y"), yb = lag.layout().at("lag.y");
    for (std::size_t k = 0; k < a.size() && k < b.size(); ++k)
      worst_pair = std::max(worst_pair, std::abs(a.values[k][ya] - b.values[k][yb]));
    if (a.size() != b.size()) worst_pair = INFINITY;
  }
  return {worst_lag <= 1e-10 && worst_equal <= 1e-12 && worst_pair <= 1e-10,
          "T=0 lag " + fmt(worst_lag) + ", T1=T2 lead-lag " + fmt(worst_equal) +
              ", T1=0 lead-lag vs lag " + fmt(worst_pair)};
}

Outcome equilibrium() {
  const auto sys = oracle::initialized("kundur_two_area");
  const DaeProblem& p = sys.problem;
  const Eigen::VectorXd z0 = p.initial().stacked();
  double worst = 0.0;
  std::ostringstream os;
  for (StepperKind k : {StepperKind::implicit_euler, StepperKind::trapezoid, StepperKind::bdf2}) {
    const auto traj = integrate(p, 0.0, 1.0, k, StepController::fixed(1e-3), NewtonConfig{}, {});
    double drift = 0.0;
    for (const auto& row : traj.values) drift = std::max(drift, (row - z0).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, drift);
    os << to_string(k) << " " << fmt(drift) << "; ";
  }
  return {worst <= 1e-6, "max drift " + joined(os)};
}

Outcome event_scenario() {
  auto& run = kundur_run();
  const DaeProblem& p = run.sys.problem;
  const Trajectory& traj = run.traj;
  const double h = 1e-3;
  const auto n = static_cast<Eigen::Index>(p.n());
  const auto& mass = p.mass().entries;

  bool continuous = traj.events.size() == 2;
  double worst_ratio = 0.0;
  Eigen::VectorXd u = p.initial().u;
  std::size_t applied = 0;
  for (const auto& marker : traj.events) {
    std::size_t k = 0;
    while (k < traj.size() && traj.times[k] < marker.time) ++k;
    if (k + 1 >= traj.size() || traj.times[k] != marker.time) {
      continuous = false;
      break;
    }
    const Eigen::VectorXd before = p.residual(traj.values[k], u, traj.times[k]);
    apply_discrete_event(p, run.c.events.events[applied++], u);
    const Eigen::VectorXd after = p.residual(traj.values[k + 1], u, traj.times[k + 1]);
    double rate = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mass[static_cast<std::size_t>(i)] == 0.0) continue;
      const double m = mass[static_cast<std::size_t>(i)];
      rate = std::max({rate, std::abs(before[i] / m), std::abs(after[i] / m)});
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mass[static_cast<std::size_t>(i)] == 0.0) continue;
      const double jump = std::abs(traj.values[k + 1][i] - traj.values[k][i]);
      const double bound = 10.0 * h * rate;
      worst_ratio = std::max(worst_ratio, bound > 0.0 ? jump / bound : (jump > 0.0 ? INFINITY : 0.0));
    }
  }
  continuous = continuous && worst_ratio <= 1.0;

  const int d1 = p.layout().at("G1.delta");
  std::vector<int> others;
  for (const auto& g : run.c.generators)
    if (g.params.id != "G1") others.push_back(p.layout().at(g.params.id + ".delta"));
  auto window_max = [&](double lo, double hi) {
    double m = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (traj.times[k] < lo || traj.times[k] > hi) continue;
      for (int i : others) m = std::max(m, std::abs(traj.values[k][i] - traj.values[k][d1]));
    }
    return m;
  };
  const double early = window_max(1.0, 2.0), late = window_max(4.0, 5.0);
  const bool finished = traj.times.back() == 5.0;
  const bool decaying = late < early && std::isfinite(early);
  return {finished && continuous && decaying,
          std::string(finished ? "completed" : "incomplete") + ", worst jump/bound " +
              fmt(worst_ratio) + ", max |d_i - d_1| on [1,2] " + fmt(early) + " vs [4,5] " +
              fmt(late)};
}

Outcome power_flow() {
  const auto pf = powerflow::nr_powerflow(oracle::bundled("two_bus"));
  const auto ref = oracle::two_bus_by_bisection(0.1, 0.1);
  const double dtheta = std::abs(pf.va[1] - (-0.0100007));
  const double dv = std::abs(pf.vm[1] - 0.9999500);
  const double doracle = std::max(std::abs(pf.va[1] - ref.theta), std::abs(pf.vm[1] - ref.v));
  const auto kundur = powerflow::nr_powerflow(oracle::bundled("kundur_two_area"));
  const bool ok = dtheta <= 1e-7 && dv <= 1e-7 && doracle <= 1e-7 && kundur.iterations < 10 &&
                  kundur.mismatch <= 1e-8;
  return {ok, "two-bus theta2 " + fmt(pf.va[1], 9) + " V2 " + fmt(pf.vm[1], 9) + " (oracle gap " +
                  fmt(doracle) + "); two-area " + std::to_string(kundur.iterations) +
                  " iterations, mismatch " + fmt(kundur.mismatch)};
}

Outcome benchmark() {
  const auto start = std::chrono::steady_clock::now();
  BenchConfig cfg;
  cfg.solvers = {StepperKind::implicit_euler, StepperKind::trapezoid, StepperKind::bdf2};
  cfg.runs = 5;
  const auto result = bench_work_precision(oracle::bundled("kundur_two_area"), cfg);
  const double elapsed = seconds_since(start);
  const auto& r = result.records;
  bool ok = r.size() == 12 && elapsed <= 600.0;
  std::ostringstream os;
  os << r.size() << " records, " << fmt(elapsed) << " s";
  if (r.size() == 12) {
    for (std::size_t j = 0; j < 4; ++j) {
      const bool beats = r[4 + j].error < r[j].error;
      ok = ok && beats;
      if (!beats) os << "; trap not below ie at h=" << fmt(r[j].control);
    }
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t j = 1; j < 4; ++j)
        if (!(r[4 * s + j].error <= r[4 * s + j - 1].error)) {
          ok = false;
          os << "; " << r[4 * s].solver << " error grows at h=" << fmt(r[4 * s + j].control);
        }
    for (const auto& rec : r) ok = ok && rec.runs == 5 && std::isfinite(rec.mean_time_s);
    os << "; errors at h=" << fmt(r[0].control) << ": ie " << fmt(r[0].error) << ", trap "
       << fmt(r[4].error) << ", bdf2 " << fmt(r[8].error);
  }
  return {ok, os.str()};
}

Outcome jacobians() {
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  std::ostringstream os;
  for (const char* name : {"kundur_two_area", "kundur_reduced", "two_machine", "two_bus"}) {
    const auto sys = oracle::initialized(name);
    const DaeProblem& p = sys.problem;
    double local = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd z = oracle::perturbed(p.initial().stacked(), rng);
      local = std::max(local, oracle::jacobian_mismatch(p, z, p.initial().u, 0.0));
    }
    worst = std::max(worst, local);
    os << name << " " << fmt(local) << "; ";
  }
  return {worst <= 1e-5, "worst relative mismatch " + joined(os)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"formulation equivalence", formulation_equivalence},
      {"gamma invariance", gamma_invariance},
      {"convergence orders", convergence_orders},
      {"model reduction", model_reduction},
      {"block degenerations", block_degenerations},
      {"equilibrium fixed point", equilibrium},
      {"event scenario", event_scenario},
      {"power flow", power_flow},
      {"benchmark harness", benchmark},
      {"jacobian correctness", jacobians},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, criteria[i].first.c_str(),
                o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
