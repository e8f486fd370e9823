#pragma once

#include "mmdae/dae.hpp"

#include <Eigen/SparseLU>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mmdae {

struct NewtonConfig {
  double tol = 1e-8;  // bound on the residual infinity norm
  int max_iter = 15;
  /// Scaling of the algebraic rows in the step equations; nullopt means gamma = h.
  std::optional<double> gamma;
  /// Keep one LU factorization across iterations and steps until Newton
  /// stalls. Off by default; all correctness tests use full Newton.
  bool reuse_factorization = false;

  void validate() const;
  double gamma_for(double h) const { return gamma ? *gamma : h; }
};

enum class StepperKind { implicit_euler, trapezoid, bdf2 };

int order_of(StepperKind kind);
std::string to_string(StepperKind kind);
/// Accepts ie|trap|trapezoid|bdf2 (and a few aliases).
StepperKind parse_stepper(const std::string& name);

struct StepController {
  enum class Mode { fixed, adaptive };

  Mode mode = Mode::fixed;
  double h0 = 1e-3;
  double hmin = 1e-3;
  double hmax = 1e-3;
  double rtol = 1e-3;
  double atol = 1e-6;
  double safety = 0.9;

  static StepController fixed(double h);
  static StepController adaptive(double rtol, double atol, double h0 = 1e-3, double hmin = 1e-9,
                                 double hmax = 0.1);
  void validate() const;
};

enum class EventAction { line_trip, line_reconnect, set_discrete };

std::string to_string(EventAction action);

struct Event {
  std::string id;
  double time = 0.0;
  EventAction action = EventAction::line_trip;
  std::string target;  // line id, or discrete state name for set_discrete
  double payload = 0.0;
};

struct EventSchedule {
  std::vector<Event> events;

  /// Sorts by time (stable) and checks every time lies in [t0, tf].
  void validate(double t0, double tf);
};

/// Discrete-state name a line status lives under.
std::string line_status_name(const std::string& line_id);

/// Applies one event to the discrete state. Throws ValidationError on a
/// double trip, double reconnect, or unknown target.
void apply_discrete_event(const DaeProblem& p, const Event& e, Eigen::VectorXd& u);

// -------------------------------------------------------------------------
// Newton kernel

struct NewtonResult {
  Eigen::VectorXd z;
  int iterations = 0;  // linear solves performed
  double residual_norm = 0.0;
};

/// Sparse LU workspace. The symbolic analysis is computed on first use and
/// reused while the pattern stays fixed.
class LinearSolver {
 public:
  void factorize(const SparseMatrix& A);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  bool factorized() const { return factorized_; }
  void invalidate() { factorized_ = false; }

 private:
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
  bool factorized_ = false;
  Eigen::Index nnz_ = -1;
};

using ResidualFn = std::function<void(const Eigen::VectorXd& z, Eigen::VectorXd& r)>;
using JacobianFn = std::function<SparseMatrix(const Eigen::VectorXd& z)>;

/// Full Newton: z <- z - A^{-1} r until ||r||_inf <= cfg.tol. With `unscale`,
/// the test reads ||unscale .* r||_inf instead, so rows carrying a gamma
/// factor are judged on their raw value.
NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                          Eigen::VectorXd guess, const NewtonConfig& cfg,
                          LinearSolver* workspace = nullptr,
                          const Eigen::VectorXd* unscale = nullptr);

// -------------------------------------------------------------------------
// Step equations
//
// All three steppers share one residual shape:
//
//   p = M_x (a0 x_t + hist) - h (beta f_t + beta_prev f_prev)
//   q = -gamma g_t
//
// with the Jacobian [[a0 M_x - h beta f_x, -h beta f_y], [-gamma g_x, -gamma g_y]].
// Differential rows with zero mass are constraints and read p_i = -f_i.
// Newton judges the q rows on g itself, so gamma moves conditioning only.

struct StepFormula {
  double a0 = 1.0;
  Eigen::VectorXd history;  // n entries, multiplied by M_x
  double beta = 1.0;
  double beta_prev = 0.0;
  Eigen::VectorXd f_prev;  // n entries, used when beta_prev != 0
};

struct StepPoint {
  double t = 0.0;
  Eigen::VectorXd z;  // stacked [x; y]
  Eigen::VectorXd f;  // differential residual rows at (z, t)
};

/// Accepted points since the last restart; newest last.
struct StepHistory {
  std::vector<StepPoint> points;

  const StepPoint& last() const { return points.back(); }
  void push(StepPoint p, std::size_t keep = 2);
  void restart(StepPoint p);
};

void step_residual(const DaeProblem& p, const StepFormula& formula, const Eigen::VectorXd& z,
                   const Eigen::VectorXd& u, double t, double h, double gamma,
                   Eigen::VectorXd& out);
SparseMatrix step_jacobian(const DaeProblem& p, const StepFormula& formula,
                           const Eigen::VectorXd& z, const Eigen::VectorXd& u, double t, double h,
                           double gamma);

/// Trapezoid step residual (p_hat, q) at trial (x_t, y_t).
struct ItmResidual {
  Eigen::VectorXd p;
  Eigen::VectorXd q;
};
ItmResidual itm_residual(const DaeProblem& p, const Eigen::VectorXd& x_t,
                         const Eigen::VectorXd& y_t, const Eigen::VectorXd& x_prev,
                         const Eigen::VectorXd& f_prev, const Eigen::VectorXd& u, double t,
                         double h, double gamma);
SparseMatrix itm_jacobian(const DaeProblem& p, const Eigen::VectorXd& x_t,
                          const Eigen::VectorXd& y_t, const Eigen::VectorXd& u, double t, double h,
                          double gamma);

StepFormula implicit_euler_formula(const DaeProblem& p, const StepHistory& history);
StepFormula trapezoid_formula(const DaeProblem& p, const StepHistory& history);
/// Variable-step BDF2; needs two points in the history.
StepFormula bdf2_formula(const DaeProblem& p, const StepHistory& history, double h);

struct StepResult {
  StepPoint point;
  int newton_iterations = 0;
};

/// One step of size h from the newest history point.
StepResult take_step(const DaeProblem& p, StepperKind kind, const StepHistory& history,
                     const Eigen::VectorXd& u, double h, const NewtonConfig& cfg,
                     LinearSolver* workspace = nullptr);
StepResult ie_step(const DaeProblem& p, const StepHistory& history, const Eigen::VectorXd& u,
                   double h, const NewtonConfig& cfg);
StepResult trapezoid_step(const DaeProblem& p, const StepHistory& history,
                          const Eigen::VectorXd& u, double h, const NewtonConfig& cfg);
StepResult bdf2_step(const DaeProblem& p, const StepHistory& history, const Eigen::VectorXd& u,
                     double h, const NewtonConfig& cfg);

/// Solves the algebraic subsystem (algebraic variables plus zero-mass
/// states) with every other state frozen. Used after discrete events and to
/// reconcile perturbed initial conditions.
Eigen::VectorXd reconcile_algebraic(const DaeProblem& p, const Eigen::VectorXd& z,
                                    const Eigen::VectorXd& u, double t, const NewtonConfig& cfg,
                                    int* iterations = nullptr);

// -------------------------------------------------------------------------
// Step-size control

struct AdaptDecision {
  bool accept = false;
  double h_next = 0.0;
  double error = 0.0;
};

/// Weighted infinity norm of (fine - coarse) / (atol + rtol |fine|).
double weighted_error(const Eigen::VectorXd& coarse, const Eigen::VectorXd& fine, double rtol,
                      double atol);
/// clamp(safety * err^(-1/(order+1)), 0.2, 5).
double step_factor(double err, int order, double safety);
AdaptDecision estimate_error_and_adapt(const Eigen::VectorXd& coarse,
                                       const Eigen::VectorXd& fine, double h, int order,
                                       const StepController& ctrl);

// -------------------------------------------------------------------------
// Integration

struct IntegrateOptions {
  bool record_all = true;  // false keeps only the first and final rows
  /// Starting point; defaults to the problem's initial condition.
  std::optional<InitialCondition> initial;
};

Trajectory integrate(const DaeProblem& p, double t0, double tf, StepperKind kind,
                     const StepController& ctrl, const NewtonConfig& newton,
                     EventSchedule events, const IntegrateOptions& options = {});

}  // namespace mmdae
