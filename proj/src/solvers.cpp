#include "mmdae/solvers.hpp"

#include "mmdae/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mmdae {

void NewtonConfig::validate() const {
  if (!(tol > 0.0)) throw ValidationError("Newton tolerance must be positive");
  if (max_iter < 1) throw ValidationError("Newton max_iter must be at least 1");
  if (gamma && (*gamma == 0.0 || !std::isfinite(*gamma)))
    throw ValidationError("gamma must be finite and nonzero");
}

int order_of(StepperKind kind) { return kind == StepperKind::implicit_euler ? 1 : 2; }

std::string to_string(StepperKind kind) {
  switch (kind) {
    case StepperKind::implicit_euler: return "ie";
    case StepperKind::trapezoid: return "trap";
    case StepperKind::bdf2: return "bdf2";
  }
  return "?";
}

StepperKind parse_stepper(const std::string& name) {
  if (name == "ie" || name == "implicit_euler" || name == "bdf1") return StepperKind::implicit_euler;
  if (name == "trap" || name == "trapezoid" || name == "itm") return StepperKind::trapezoid;
  if (name == "bdf2") return StepperKind::bdf2;
  throw ValidationError("unknown solver '" + name + "' (expected ie, trap or bdf2)");
}

StepController StepController::fixed(double h) {
  StepController c;
  c.mode = Mode::fixed;
  c.h0 = c.hmin = c.hmax = h;
  return c;
}

StepController StepController::adaptive(double rtol, double atol, double h0, double hmin,
                                        double hmax) {
  StepController c;
  c.mode = Mode::adaptive;
  c.rtol = rtol;
  c.atol = atol;
  c.h0 = h0;
  c.hmin = hmin;
  c.hmax = hmax;
  return c;
}

void StepController::validate() const {
  if (!(hmin > 0.0 && hmin <= h0 && h0 <= hmax))
    throw ValidationError("step sizes must satisfy 0 < hmin <= h0 <= hmax");
  if (mode == Mode::adaptive) {
    if (!(rtol > 0.0 && atol > 0.0)) throw ValidationError("rtol and atol must be positive");
    if (!(safety > 0.0 && safety <= 1.0)) throw ValidationError("safety must lie in (0, 1]");
  }
}

std::string to_string(EventAction action) {
  switch (action) {
    case EventAction::line_trip: return "line_trip";
    case EventAction::line_reconnect: return "line_reconnect";
    case EventAction::set_discrete: return "set_discrete";
  }
  return "?";
}

void EventSchedule::validate(double t0, double tf) {
  for (const auto& e : events) {
    if (!std::isfinite(e.time) || e.time < t0 || e.time > tf) {
      std::ostringstream os;
      os << "event '" << e.id << "' at t=" << e.time << " lies outside the simulation span [" << t0
         << ", " << tf << "]";
      throw ValidationError(os.str());
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });
}

std::string line_status_name(const std::string& line_id) { return "line:" + line_id; }

void apply_discrete_event(const DaeProblem& p, const Event& e, Eigen::VectorXd& u) {
  switch (e.action) {
    case EventAction::line_trip:
    case EventAction::line_reconnect: {
      const auto idx = p.discrete_layout().find(line_status_name(e.target));
      if (!idx) throw ValidationError("event '" + e.id + "' targets unknown line '" + e.target + "'");
      const bool trip = e.action == EventAction::line_trip;
      const double status = u[*idx];
      if (trip && status == 0.0)
        throw ValidationError("event '" + e.id + "': line '" + e.target + "' is already out");
      if (!trip && status != 0.0)
        throw ValidationError("event '" + e.id + "': line '" + e.target + "' is already in");
      u[*idx] = trip ? 0.0 : 1.0;
      break;
    }
    case EventAction::set_discrete: {
      const auto idx = p.discrete_layout().find(e.target);
      if (!idx)
        throw ValidationError("event '" + e.id + "' targets unknown discrete state '" + e.target +
                              "'");
      u[*idx] = e.payload;
      break;
    }
  }
}

// ---------------------------------------------------------------------------

void LinearSolver::factorize(const SparseMatrix& A) {
  if (!analyzed_ || A.nonZeros() != nnz_) {
    lu_.analyzePattern(A);
    analyzed_ = true;
    nnz_ = A.nonZeros();
  }
  lu_.factorize(A);
  if (lu_.info() != Eigen::Success) {
    factorized_ = false;
    throw NewtonError(NewtonError::Kind::singular_matrix,
                      "singular Newton matrix: " + lu_.lastErrorMessage(),
                      std::numeric_limits<double>::quiet_NaN());
  }
  factorized_ = true;
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& b) const { return lu_.solve(b); }

NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                          Eigen::VectorXd guess, const NewtonConfig& cfg,
                          LinearSolver* workspace, const Eigen::VectorXd* unscale) {
  if (!guess.allFinite())
    throw NewtonError(NewtonError::Kind::diverged, "non-finite Newton initial guess",
                      std::numeric_limits<double>::quiet_NaN());
  LinearSolver local;
  LinearSolver& ls = workspace ? *workspace : local;
  if (!cfg.reuse_factorization) ls.invalidate();

  NewtonResult res;
  res.z = std::move(guess);
  Eigen::VectorXd r(res.z.size());
  double prev_norm = std::numeric_limits<double>::infinity();
  for (int k = 0;; ++k) {
    try {
      residual(res.z, r);
    } catch (const EvaluationError& e) {
      throw NewtonError(NewtonError::Kind::diverged, std::string("Newton diverged: ") + e.what(),
                        std::numeric_limits<double>::infinity());
    }
    const double norm =
        unscale ? r.cwiseProduct(*unscale).lpNorm<Eigen::Infinity>() : r.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(norm))
      throw NewtonError(NewtonError::Kind::diverged, "Newton diverged: non-finite residual", norm);
    res.residual_norm = norm;
    // One correction is always taken: a slow trajectory can start inside the
    // tolerance and would otherwise never move.
    if (norm <= cfg.tol && (k > 0 || norm == 0.0)) return res;
    if (k == cfg.max_iter) {
      std::ostringstream os;
      os << "Newton exceeded " << cfg.max_iter << " iterations (residual " << norm << ")";
      throw NewtonError(NewtonError::Kind::max_iter_exceeded, os.str(), norm);
    }
    const bool refresh = !cfg.reuse_factorization || !ls.factorized() || norm > 0.5 * prev_norm;
    if (refresh) {
      try {
        ls.factorize(jacobian(res.z));
      } catch (const EvaluationError& e) {
        throw NewtonError(NewtonError::Kind::diverged, std::string("Newton diverged: ") + e.what(),
                          norm);
      }
    }
    prev_norm = norm;
    res.z -= ls.solve(r);
    ++res.iterations;
  }
}

// ---------------------------------------------------------------------------

void StepHistory::push(StepPoint p, std::size_t keep) {
  points.push_back(std::move(p));
  while (points.size() > keep) points.erase(points.begin());
}

void StepHistory::restart(StepPoint p) {
  points.clear();
  points.push_back(std::move(p));
}

void step_residual(const DaeProblem& p, const StepFormula& formula, const Eigen::VectorXd& z,
                   const Eigen::VectorXd& u, double t, double h, double gamma,
                   Eigen::VectorXd& out) {
  out.resize(z.size());
  p.residual({z.data(), static_cast<std::size_t>(z.size())},
             {u.data(), static_cast<std::size_t>(u.size())}, t,
             {out.data(), static_cast<std::size_t>(out.size())});
  const auto n = static_cast<Eigen::Index>(p.n());
  const auto& mass = p.mass().entries;
  for (Eigen::Index i = 0; i < n; ++i) {
    // Zero-mass rows are constraints: the trapezoid average would let them
    // ring, and an h or gamma factor would loosen the Newton bound on them.
    if (mass[static_cast<std::size_t>(i)] == 0.0) {
      out[i] = -out[i];
      continue;
    }
    double rhs = formula.beta * out[i];
    if (formula.beta_prev != 0.0) rhs += formula.beta_prev * formula.f_prev[i];
    out[i] = mass[static_cast<std::size_t>(i)] * (formula.a0 * z[i] + formula.history[i]) - h * rhs;
  }
  out.tail(out.size() - n) *= -gamma;
}

SparseMatrix step_jacobian(const DaeProblem& p, const StepFormula& formula,
                           const Eigen::VectorXd& z, const Eigen::VectorXd& u, double t, double h,
                           double gamma) {
  SparseMatrix J = p.jacobian(z, u, t);
  const int n = static_cast<int>(p.n());
  const double cd = -h * formula.beta;
  const auto& mass = p.mass().entries;
  for (int col = 0; col < J.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(J, col); it; ++it) {
      if (it.row() >= n)
        it.valueRef() *= -gamma;
      else
        it.valueRef() *= mass[static_cast<std::size_t>(it.row())] != 0.0 ? cd : -1.0;
    }
  }
  const auto& slots = p.diagonal_slots();
  for (int i = 0; i < n; ++i) J.valuePtr()[slots[static_cast<std::size_t>(i)]] += formula.a0 * mass[static_cast<std::size_t>(i)];
  return J;
}

namespace {

Eigen::VectorXd stack(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Eigen::VectorXd z(x.size() + y.size());
  z << x, y;
  return z;
}

}  // namespace

ItmResidual itm_residual(const DaeProblem& p, const Eigen::VectorXd& x_t,
                         const Eigen::VectorXd& y_t, const Eigen::VectorXd& x_prev,
                         const Eigen::VectorXd& f_prev, const Eigen::VectorXd& u, double t,
                         double h, double gamma) {
  StepFormula f;
  f.a0 = 1.0;
  f.history = -x_prev;
  f.beta = 0.5;
  f.beta_prev = 0.5;
  f.f_prev = f_prev;
  Eigen::VectorXd r;
  step_residual(p, f, stack(x_t, y_t), u, t, h, gamma, r);
  return {r.head(x_t.size()), r.tail(y_t.size())};
}

SparseMatrix itm_jacobian(const DaeProblem& p, const Eigen::VectorXd& x_t,
                          const Eigen::VectorXd& y_t, const Eigen::VectorXd& u, double t, double h,
                          double gamma) {
  StepFormula f;
  f.a0 = 1.0;
  f.beta = 0.5;
  return step_jacobian(p, f, stack(x_t, y_t), u, t, h, gamma);
}

StepFormula implicit_euler_formula(const DaeProblem& p, const StepHistory& history) {
  StepFormula f;
  f.a0 = 1.0;
  f.history = -history.last().z.head(static_cast<Eigen::Index>(p.n()));
  f.beta = 1.0;
  return f;
}

StepFormula trapezoid_formula(const DaeProblem& p, const StepHistory& history) {
  StepFormula f;
  f.a0 = 1.0;
  f.history = -history.last().z.head(static_cast<Eigen::Index>(p.n()));
  f.beta = 0.5;
  f.beta_prev = 0.5;
  f.f_prev = history.last().f;
  return f;
}

StepFormula bdf2_formula(const DaeProblem& p, const StepHistory& history, double h) {
  if (history.points.size() < 2)
    throw HistoryUnavailable("BDF2 needs two accepted points since the last restart");
  const auto n = static_cast<Eigen::Index>(p.n());
  const StepPoint& last = history.points[history.points.size() - 1];
  const StepPoint& prev = history.points[history.points.size() - 2];
  const double h_prev = last.t - prev.t;
  const double w = h / h_prev;
  StepFormula f;
  f.a0 = (1.0 + 2.0 * w) / (1.0 + w);
  f.history = -(1.0 + w) * last.z.head(n) + (w * w / (1.0 + w)) * prev.z.head(n);
  f.beta = 1.0;
  return f;
}

StepResult take_step(const DaeProblem& p, StepperKind kind, const StepHistory& history,
                     const Eigen::VectorXd& u, double h, const NewtonConfig& cfg,
                     LinearSolver* workspace) {
  StepFormula formula;
  switch (kind) {
    case StepperKind::implicit_euler: formula = implicit_euler_formula(p, history); break;
    case StepperKind::trapezoid: formula = trapezoid_formula(p, history); break;
    case StepperKind::bdf2: formula = bdf2_formula(p, history, h); break;
  }
  const double t = history.last().t + h;
  const double gamma = cfg.gamma_for(h);
  auto residual = [&](const Eigen::VectorXd& z, Eigen::VectorXd& r) {
    step_residual(p, formula, z, u, t, h, gamma, r);
  };
  auto jacobian = [&](const Eigen::VectorXd& z) {
    return step_jacobian(p, formula, z, u, t, h, gamma);
  };
  Eigen::VectorXd unscale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p.size()));
  unscale.tail(static_cast<Eigen::Index>(p.m())).setConstant(1.0 / std::abs(gamma));
  NewtonResult nr =
      newton_solve(residual, jacobian, history.last().z, cfg, workspace, &unscale);

  StepResult out;
  out.newton_iterations = nr.iterations;
  out.point.t = t;
  out.point.f = p.residual(nr.z, u, t).head(static_cast<Eigen::Index>(p.n()));
  out.point.z = std::move(nr.z);
  return out;
}

StepResult ie_step(const DaeProblem& p, const StepHistory& history, const Eigen::VectorXd& u,
                   double h, const NewtonConfig& cfg) {
  return take_step(p, StepperKind::implicit_euler, history, u, h, cfg);
}

StepResult trapezoid_step(const DaeProblem& p, const StepHistory& history,
                          const Eigen::VectorXd& u, double h, const NewtonConfig& cfg) {
  return take_step(p, StepperKind::trapezoid, history, u, h, cfg);
}

StepResult bdf2_step(const DaeProblem& p, const StepHistory& history, const Eigen::VectorXd& u,
                     double h, const NewtonConfig& cfg) {
  return take_step(p, StepperKind::bdf2, history, u, h, cfg);
}

Eigen::VectorXd reconcile_algebraic(const DaeProblem& p, const Eigen::VectorXd& z,
                                    const Eigen::VectorXd& u, double t, const NewtonConfig& cfg,
                                    int* iterations) {
  const int size = static_cast<int>(p.size());
  const int n = static_cast<int>(p.n());
  std::vector<int> unknowns;
  std::vector<int> local(static_cast<std::size_t>(size), -1);
  for (int i = 0; i < size; ++i) {
    if (i >= n || p.mass().entries[static_cast<std::size_t>(i)] == 0.0) {
      local[static_cast<std::size_t>(i)] = static_cast<int>(unknowns.size());
      unknowns.push_back(i);
    }
  }
  if (iterations) *iterations = 0;
  if (unknowns.empty()) return z;

  const auto k = static_cast<Eigen::Index>(unknowns.size());
  Eigen::VectorXd full = z;
  Eigen::VectorXd guess(k);
  for (Eigen::Index i = 0; i < k; ++i) guess[i] = z[unknowns[static_cast<std::size_t>(i)]];

  auto scatter = [&](const Eigen::VectorXd& w) {
    for (Eigen::Index i = 0; i < k; ++i) full[unknowns[static_cast<std::size_t>(i)]] = w[i];
  };
  auto residual = [&](const Eigen::VectorXd& w, Eigen::VectorXd& r) {
    scatter(w);
    const Eigen::VectorXd F = p.residual(full, u, t);
    r.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) r[i] = F[unknowns[static_cast<std::size_t>(i)]];
  };
  auto jacobian = [&](const Eigen::VectorXd& w) {
    scatter(w);
    const SparseMatrix J = p.jacobian(full, u, t);
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(J.nonZeros()));
    for (int col = 0; col < J.outerSize(); ++col) {
      const int lc = local[static_cast<std::size_t>(col)];
      if (lc < 0) continue;
      for (SparseMatrix::InnerIterator it(J, col); it; ++it) {
        const int lr = local[static_cast<std::size_t>(it.row())];
        if (lr >= 0) trips.emplace_back(lr, lc, it.value());
      }
    }
    SparseMatrix A(k, k);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    return A;
  };
  NewtonConfig solve_cfg = cfg;
  solve_cfg.reuse_factorization = false;
  NewtonResult nr = newton_solve(residual, jacobian, guess, solve_cfg);
  scatter(nr.z);
  if (iterations) *iterations = nr.iterations;
  return full;
}

// ---------------------------------------------------------------------------

double weighted_error(const Eigen::VectorXd& coarse, const Eigen::VectorXd& fine, double rtol,
                      double atol) {
  double err = 0.0;
  for (Eigen::Index i = 0; i < fine.size(); ++i) {
    const double w = atol + rtol * std::abs(fine[i]);
    err = std::max(err, std::abs(fine[i] - coarse[i]) / w);
  }
  return err;
}

double step_factor(double err, int order, double safety) {
  if (err <= 0.0) return 5.0;
  const double f = safety * std::pow(err, -1.0 / (order + 1));
  return std::clamp(f, 0.2, 5.0);
}

AdaptDecision estimate_error_and_adapt(const Eigen::VectorXd& coarse,
                                       const Eigen::VectorXd& fine, double h, int order,
                                       const StepController& ctrl) {
  AdaptDecision d;
  d.error = weighted_error(coarse, fine, ctrl.rtol, ctrl.atol);
  d.accept = d.error <= 1.0;
  d.h_next = std::clamp(h * step_factor(d.error, order, ctrl.safety), ctrl.hmin, ctrl.hmax);
  return d;
}

// ---------------------------------------------------------------------------

namespace {

class Integrator {
 public:
  Integrator(const DaeProblem& p, StepperKind kind, const StepController& ctrl,
             const NewtonConfig& newton, const EventSchedule& events,
             const IntegrateOptions& options)
      : p_(p), kind_(kind), ctrl_(ctrl), newton_(newton), events_(events), options_(options) {}

  Trajectory run(double t0, double tf) {
    const InitialCondition& ic = options_.initial ? *options_.initial : p_.initial();
    u_ = ic.u;
    p_.check_discrete(u_);
    Eigen::VectorXd z = ic.stacked();
    if (static_cast<std::size_t>(z.size()) != p_.size())
      throw ValidationError("initial condition does not match the problem layout");

    traj_.names = p_.layout().names();
    history_.restart(point_at(t0, std::move(z)));
    record(history_.last(), true);

    double t = t0;
    apply_events_at(t);
    h_ = ctrl_.h0;
    segment_start_ = t;
    segment_steps_ = 0;

    while (t < tf) {
      const double t_stop = next_stop(t, tf);
      const double t_next = ctrl_.mode == StepController::Mode::fixed ? fixed_step(t, t_stop)
                                                                       : adaptive_step(t, t_stop);
      t = t_next;
      record(history_.last(), t >= tf);
      if (t == t_stop) apply_events_at(t);
    }
    if (!options_.record_all && traj_.times.back() != history_.last().t)
      record(history_.last(), true);
    return std::move(traj_);
  }

 private:
  StepPoint point_at(double t, Eigen::VectorXd z) {
    StepPoint pt;
    pt.t = t;
    pt.f = p_.residual(z, u_, t).head(static_cast<Eigen::Index>(p_.n()));
    pt.z = std::move(z);
    return pt;
  }

  void record(const StepPoint& pt, bool force) {
    if (!options_.record_all && !force) return;
    if (!traj_.times.empty() && traj_.times.back() == pt.t) return;
    traj_.times.push_back(pt.t);
    traj_.values.push_back(pt.z);
  }

  double next_stop(double t, double tf) {
    while (next_event_ < events_.events.size() && events_.events[next_event_].time <= t)
      ++next_event_;
    if (next_event_ < events_.events.size()) return std::min(events_.events[next_event_].time, tf);
    return tf;
  }

  void apply_events_at(double t) {
    bool any = false;
    while (next_event_ < events_.events.size() && events_.events[next_event_].time <= t) {
      const Event& e = events_.events[next_event_];
      apply_discrete_event(p_, e, u_);
      traj_.events.push_back({t, e.id});
      ++next_event_;
      any = true;
    }
    if (!any) return;
    p_.check_discrete(u_);
    int iters = 0;
    Eigen::VectorXd z;
    try {
      z = reconcile_algebraic(p_, history_.last().z, u_, t, newton_, &iters);
    } catch (const NewtonError& e) {
      std::ostringstream os;
      os << "algebraic re-solve after event at t=" << t << ": " << e.what();
      throw NewtonError(e.kind(), os.str(), e.residual_norm());
    }
    traj_.stats.newton_iterations += iters;
    history_.restart(point_at(t, std::move(z)));
    workspace_.invalidate();
    segment_start_ = t;
    segment_steps_ = 0;
  }

  StepperKind stepper_now(const StepHistory& h) const {
    if (kind_ == StepperKind::bdf2 && h.points.size() < 2) return StepperKind::implicit_euler;
    return kind_;
  }

  StepResult attempt(const StepHistory& history, double h) {
    if (newton_.reuse_factorization && h != last_h_) workspace_.invalidate();
    last_h_ = h;
    StepResult r = take_step(p_, stepper_now(history), history, u_, h, newton_, &workspace_);
    traj_.stats.newton_iterations += r.newton_iterations;
    return r;
  }

  static bool close_to(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b));
  }

  double fixed_step(double t, double t_stop) {
    double target = segment_start_ + static_cast<double>(segment_steps_ + 1) * ctrl_.h0;
    if (target >= t_stop || close_to(target, t_stop)) target = t_stop;
    const double h = target - t;
    try {
      StepResult r = attempt(history_, h);
      r.point.t = target;
      history_.push(std::move(r.point));
    } catch (const NewtonError& e) {
      std::ostringstream os;
      os << "step to t=" << target << " failed: " << e.what();
      throw NewtonError(e.kind(), os.str(), e.residual_norm());
    }
    ++segment_steps_;
    ++traj_.stats.steps_accepted;
    return target;
  }

  double adaptive_step(double t, double t_stop) {
    const int order = order_of(kind_);
    for (;;) {
      double h = std::min(h_, t_stop - t);
      double target = t + h;
      if (close_to(target, t_stop) || t_stop - target < ctrl_.hmin * 1e-3) {
        target = t_stop;
        h = t_stop - t;
      }
      try {
        StepResult coarse = attempt(history_, h);
        StepHistory fine_history = history_;
        StepResult half1 = attempt(fine_history, 0.5 * h);
        fine_history.push(half1.point);
        StepResult half2 = attempt(fine_history, target - half1.point.t);
        half2.point.t = target;

        const AdaptDecision d =
            estimate_error_and_adapt(coarse.point.z, half2.point.z, h, order, ctrl_);
        if (d.accept || h <= ctrl_.hmin) {
          if (options_.record_all) record(half1.point, false);
          history_.push(std::move(half1.point));
          history_.push(std::move(half2.point));
          ++traj_.stats.steps_accepted;
          h_ = d.h_next;
          return target;
        }
        ++traj_.stats.steps_rejected;
        h_ = d.h_next;
      } catch (const NewtonError& e) {
        ++traj_.stats.steps_rejected;
        if (h <= ctrl_.hmin) {
          std::ostringstream os;
          os << "step size underflow at t=" << t << " (h=" << h << "): " << e.what();
          throw StepSizeUnderflow(os.str());
        }
        h_ = std::max(ctrl_.hmin, 0.25 * h);
      }
    }
  }

  const DaeProblem& p_;
  StepperKind kind_;
  StepController ctrl_;
  NewtonConfig newton_;
  const EventSchedule& events_;
  const IntegrateOptions& options_;

  Eigen::VectorXd u_;
  StepHistory history_;
  Trajectory traj_;
  LinearSolver workspace_;
  std::size_t next_event_ = 0;
  double h_ = 0.0;
  double last_h_ = 0.0;
  double segment_start_ = 0.0;
  long segment_steps_ = 0;
};

}  // namespace

Trajectory integrate(const DaeProblem& p, double t0, double tf, StepperKind kind,
                     const StepController& ctrl, const NewtonConfig& newton,
                     EventSchedule events, const IntegrateOptions& options) {
  if (!(tf > t0)) throw ValidationError("simulation end time must exceed the start time");
  ctrl.validate();
  newton.validate();
  events.validate(t0, tf);
  Integrator integrator(p, kind, ctrl, newton, events, options);
  return integrator.run(t0, tf);
}

}  // namespace mmdae
