#pragma once

#include "mmdae/case.hpp"
#include "mmdae/solvers.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mmdae {

struct WorkPrecisionRecord {
  std::string solver;
  double control = 0.0;  // h for fixed steps, rtol (= atol) when adaptive
  double error = 0.0;    // infinity norm at the final step; NaN if the run failed
  double error_l2 = 0.0;
  double mean_time_s = 0.0;
  long steps_accepted = 0;
  long steps_rejected = 0;
  long newton_iters = 0;
  int runs = 0;
  std::string note;  // failure diagnostics
};

struct BenchConfig {
  std::vector<StepperKind> solvers{StepperKind::implicit_euler, StepperKind::trapezoid,
                                   StepperKind::bdf2};
  std::vector<double> controls{4e-3, 2e-3, 1e-3, 5e-4};
  bool adaptive = false;
  int runs = 5;
  NewtonConfig newton;
  /// Reference: trapezoid at min fixed h divided by this factor.
  double reference_divisor = 64.0;
  /// Used instead of the divisor rule when set (required for adaptive grids).
  std::optional<double> reference_h;
  double reference_tol = 1e-12;
  bool parallel = false;

  void validate() const;
};

struct BenchResult {
  std::vector<WorkPrecisionRecord> records;
  double reference_h = 0.0;
  Eigen::VectorXd reference_final;
};

/// Work-precision sweep on an initialized problem. Every run starts from the
/// same initial condition with the same events over [t0, tf].
BenchResult bench_work_precision(const DaeProblem& p, const EventSchedule& events, double t0,
                                 double tf, const BenchConfig& cfg);

/// Runs power flow and initialization first; events and tf come from the case.
BenchResult bench_work_precision(const SystemCase& c, const BenchConfig& cfg);

/// Columns: solver, control, error, mean_time_s, steps_accepted,
/// steps_rejected, newton_iters, error_l2.
void write_bench_csv(const std::vector<WorkPrecisionRecord>& records, std::ostream& out,
                     bool include_timing = true);
void write_bench_csv(const std::vector<WorkPrecisionRecord>& records,
                     const std::filesystem::path& path);

}  // namespace mmdae
