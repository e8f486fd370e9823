#include "mmdae/blocks.hpp"
#include "mmdae/errors.hpp"
#include "mmdae/solvers.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace mmdae;

namespace {

SparseMatrix scalar_matrix(double v) {
  SparseMatrix A(1, 1);
  A.insert(0, 0) = v;
  A.makeCompressed();
  return A;
}

StepHistory start_at(const DaeProblem& p, double t, const Eigen::VectorXd& z) {
  StepHistory h;
  h.restart({t, z, p.residual(z, p.initial().u, t).head(p.n())});
  return h;
}

}  // namespace

TEST_CASE("newton on z^2 - 4 from 3") {
  auto r = newton_solve([](const Eigen::VectorXd& z, Eigen::VectorXd& out) {
                          out.resize(1);
                          out[0] = z[0] * z[0] - 4.0;
                        },
                        [](const Eigen::VectorXd& z) { return scalar_matrix(2.0 * z[0]); },
                        Eigen::VectorXd::Constant(1, 3.0), NewtonConfig{});
  CHECK(std::abs(r.z[0] - 2.0) <= 1e-8);
  CHECK(r.residual_norm <= 1e-8);
}

TEST_CASE("newton on a linear residual takes one solve") {
  auto r = newton_solve([](const Eigen::VectorXd& z, Eigen::VectorXd& out) { out = z; },
                        [](const Eigen::VectorXd&) { return scalar_matrix(1.0); },
                        Eigen::VectorXd::Constant(1, 5.0), NewtonConfig{});
  CHECK(r.z[0] == 0.0);
  CHECK(r.iterations == 1);
}

TEST_CASE("newton failure modes") {
  NewtonConfig cfg;
  cfg.max_iter = 2;
  try {
    newton_solve([](const Eigen::VectorXd& z, Eigen::VectorXd& out) {
                   out.resize(1);
                   out[0] = std::atan(z[0]) - 1.4;
                 },
                 [](const Eigen::VectorXd& z) { return scalar_matrix(1.0 / (1.0 + z[0] * z[0])); },
                 Eigen::VectorXd::Constant(1, 10.0), cfg);
    FAIL("expected failure");
  } catch (const NewtonError& e) {
    CHECK(e.residual_norm() > 0.0);
  }
  CHECK_THROWS_AS(newton_solve([](const Eigen::VectorXd& z, Eigen::VectorXd& out) { out = z; },
                               [](const Eigen::VectorXd&) { return scalar_matrix(0.0); },
                               Eigen::VectorXd::Constant(1, 1.0), NewtonConfig{}),
                  NewtonError);
}

TEST_CASE("newton config validation") {
  NewtonConfig bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = {};
  bad.max_iter = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  NewtonConfig g;
  CHECK(g.gamma_for(0.01) == 0.01);
  g.gamma = 1.0;
  CHECK(g.gamma_for(0.01) == 1.0);
}

TEST_CASE("trapezoid residual on the lag block by hand") {
  auto p = oracle::lag_problem(1.0, 2.0, 1.0, 0.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd f_prev = Eigen::VectorXd::Constant(1, 1.0);
  auto r = itm_residual(p, zero, Eigen::VectorXd(0), zero, f_prev, p.initial().u, 0.1, 0.1, 0.1);
  CHECK(r.p[0] == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(r.q.size() == 0);

  const Eigen::VectorXd solved = Eigen::VectorXd::Constant(1, 0.1 / 2.05);
  r = itm_residual(p, solved, Eigen::VectorXd(0), zero, f_prev, p.initial().u, 0.1, 0.1, 0.1);
  CHECK(std::abs(r.p[0]) < 1e-15);

  const auto A = itm_jacobian(p, zero, Eigen::VectorXd(0), p.initial().u, 0.1, 0.1, 0.1);
  CHECK(Eigen::MatrixXd(A)(0, 0) == doctest::Approx(2.05).epsilon(1e-15));
  const auto A0 = itm_jacobian(p, zero, Eigen::VectorXd(0), p.initial().u, 0.1, 0.0, 0.1);
  CHECK(Eigen::MatrixXd(A0)(0, 0) == 2.0);
}

TEST_CASE("trapezoid lag step converges quickly") {
  auto p = oracle::lag_problem(1.0, 2.0, 1.0, 0.0);
  auto hist = start_at(p, 0.0, p.initial().stacked());
  auto step = trapezoid_step(p, hist, p.initial().u, 0.1, NewtonConfig{});
  CHECK(step.point.z[0] == doctest::Approx(0.1 / 2.05).epsilon(1e-12));
  CHECK(step.newton_iterations <= 3);
}

TEST_CASE("algebraic rows are -gamma g for any gamma") {
  auto sys = oracle::initialized("two_machine");
  const auto& p = sys.problem;
  const auto n = static_cast<Eigen::Index>(p.n());
  const Eigen::VectorXd x = p.initial().x, y = p.initial().y;
  const Eigen::VectorXd all = p.residual(p.initial().stacked(), p.initial().u, 0.0);
  const Eigen::VectorXd f = all.head(n);
  const Eigen::VectorXd g = all.tail(p.m());
  for (double gamma : {1e-3, 1.0, 7.0}) {
    auto r = itm_residual(p, x, y, x, f, p.initial().u, 0.0, 1e-3, gamma);
    CHECK((r.q + gamma * g).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(r.q.lpNorm<Eigen::Infinity>() <= gamma * 1e-10);
  }
}

TEST_CASE("unit-mass step Jacobian equals the traditional matrix") {
  auto sys = oracle::initialized("kundur_two_area");
  const auto q = to_traditional(sys.problem);
  const auto& ic = q.initial();
  const double h = 0.01, gamma = 0.5;
  const Eigen::MatrixXd A = Eigen::MatrixXd(itm_jacobian(q, ic.x, ic.y, ic.u, 0.0, h, gamma));
  const auto J = q.eval_jacobians(ic.x, ic.y, ic.u, 0.0);
  const auto n = static_cast<Eigen::Index>(q.n());
  const auto m = static_cast<Eigen::Index>(q.m());
  Eigen::MatrixXd expected(n + m, n + m);
  expected.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n) - 0.5 * h * Eigen::MatrixXd(J.fx);
  expected.topRightCorner(n, m) = -0.5 * h * Eigen::MatrixXd(J.fy);
  expected.bottomLeftCorner(m, n) = -gamma * Eigen::MatrixXd(J.gx);
  expected.bottomRightCorner(m, m) = -gamma * Eigen::MatrixXd(J.gy);
  CHECK((A - expected).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("closed-form single steps on x' = -x") {
  auto p = oracle::lag_problem(1.0, 1.0, 0.0, 1.0);
  const auto u = p.initial().u;
  NewtonConfig cfg;
  cfg.tol = 1e-14;
  auto hist = start_at(p, 0.0, p.initial().stacked());
  CHECK(ie_step(p, hist, u, 0.1, cfg).point.z[0] == doctest::Approx(1.0 / 1.1).epsilon(1e-13));
  CHECK(trapezoid_step(p, hist, u, 0.1, cfg).point.z[0] ==
        doctest::Approx(0.95 / 1.05).epsilon(1e-13));

  CHECK_THROWS_AS(bdf2_step(p, hist, u, 0.1, cfg), HistoryUnavailable);
  const double x1 = std::exp(-0.1);
  const Eigen::VectorXd z1 = Eigen::VectorXd::Constant(1, x1);
  hist.push({0.1, z1, p.residual(z1, u, 0.1).head(1)});
  CHECK(bdf2_step(p, hist, u, 0.1, cfg).point.z[0] ==
        doctest::Approx((4.0 * x1 - 1.0) / 3.2).epsilon(1e-13));
}

TEST_CASE("lag step response over five seconds") {
  auto p = oracle::lag_problem(1.0, 2.0, 1.0, 0.0);
  for (StepperKind k : {StepperKind::implicit_euler, StepperKind::trapezoid, StepperKind::bdf2}) {
    auto traj = integrate(p, 0.0, 5.0, k, StepController::fixed(1e-3), NewtonConfig{}, {});
    CAPTURE(to_string(k));
    CHECK(traj.times.back() == 5.0);
    CHECK(std::abs(traj.final_state()[0] - (1.0 - std::exp(-2.5))) < 1e-3);
    CHECK(traj.size() == 5001);
  }
}

TEST_CASE("step-size factor formula") {
  CHECK(step_factor(1.0, 1, 0.9) == doctest::Approx(0.9));
  CHECK(step_factor(1.0, 2, 0.9) == doctest::Approx(0.9));
  CHECK(step_factor(1e-12, 2, 0.9) == 5.0);
  CHECK(step_factor(16.0, 2, 0.9) == doctest::Approx(0.9 * std::pow(16.0, -1.0 / 3.0)));
  CHECK(step_factor(16.0, 2, 0.9) == doctest::Approx(0.357).epsilon(1e-3));
  CHECK(step_factor(1e12, 2, 0.9) == 0.2);

  auto ctrl = StepController::adaptive(1e-3, 1e-6, 1e-2, 1e-4, 0.05);
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, 1.0);
  auto d = estimate_error_and_adapt(a, a, 0.02, 2, ctrl);
  CHECK(d.accept);
  CHECK(d.h_next == 0.05);  // 5x growth clamped to hmax
  auto bad = estimate_error_and_adapt(a, a * 1.1, 0.02, 2, ctrl);
  CHECK_FALSE(bad.accept);
  CHECK(bad.h_next < 0.02);
}

TEST_CASE("controller and schedule validation") {
  CHECK_THROWS_AS(StepController::fixed(0.0).validate(), ValidationError);
  auto bad = StepController::adaptive(1e-3, 1e-6, 1e-2, 1e-1, 1.0);
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  EventSchedule s;
  s.events.push_back({"late", 6.0, EventAction::line_trip, "L", 0.0});
  CHECK_THROWS_AS(s.validate(0.0, 5.0), ValidationError);
  s.events = {{"b", 0.2, EventAction::line_trip, "L", 0.0},
              {"a", 0.1, EventAction::line_trip, "M", 0.0}};
  s.validate(0.0, 5.0);
  CHECK(s.events.front().id == "a");
}

TEST_CASE("adaptive integration of a smooth response") {
  auto p = oracle::lag_problem(1.0, 2.0, 1.0, 0.0);
  for (StepperKind k : {StepperKind::implicit_euler, StepperKind::trapezoid, StepperKind::bdf2}) {
    auto ctrl = StepController::adaptive(1e-6, 1e-6, 1e-3, 1e-8, 0.5);
    auto traj = integrate(p, 0.0, 5.0, k, ctrl, NewtonConfig{}, {});
    CAPTURE(to_string(k));
    CHECK(traj.times.back() == 5.0);
    // Local control only; global error of the first-order method is larger.
    const double bound = order_of(k) == 1 ? 1e-3 : 1e-4;
    CHECK(std::abs(traj.final_state()[0] - (1.0 - std::exp(-2.5))) < bound);
    CHECK(traj.stats.steps_accepted < 5000);
  }
}

TEST_CASE("steps land on event times and the BDF2 history restarts") {
  auto sys = oracle::initialized("kundur_two_area");
  const auto c = oracle::bundled("kundur_two_area");
  NewtonConfig cfg;
  auto traj = integrate(sys.problem, 0.0, 0.3, StepperKind::bdf2, StepController::fixed(0.007),
                        cfg, c.events);
  bool trip = false, reconnect = false;
  for (double t : traj.times) {
    trip = trip || t == 0.1;
    reconnect = reconnect || t == 0.15;
  }
  CHECK(trip);
  CHECK(reconnect);
  CHECK(traj.times.back() == 0.3);
  REQUIRE(traj.events.size() == 2);
  CHECK(traj.events[0].id == "trip");
}

TEST_CASE("post-event algebraic re-solve is consistent") {
  auto sys = oracle::initialized("kundur_two_area");
  const auto& p = sys.problem;
  Eigen::VectorXd u = p.initial().u;
  apply_discrete_event(p, {"trip", 0.1, EventAction::line_trip, "L8-9b", 0.0}, u);
  NewtonConfig cfg;
  const Eigen::VectorXd z = reconcile_algebraic(p, p.initial().stacked(), u, 0.1, cfg);
  const auto n = static_cast<Eigen::Index>(p.n());
  // Positive-mass states are untouched.
  for (Eigen::Index i = 0; i < n; ++i)
    if (p.mass().entries[i] > 0.0) CHECK(z[i] == p.initial().x[i]);
  const auto report = check_consistency(p, z.head(n), z.tail(z.size() - n), u, 0.1, 1e300);
  CHECK(report.g_norm <= 1e-8);

  CHECK_THROWS_AS(apply_discrete_event(p, {"again", 0.1, EventAction::line_trip, "L8-9b", 0.0}, u),
                  ValidationError);
  CHECK_THROWS_AS(
      apply_discrete_event(p, {"nope", 0.1, EventAction::line_trip, "missing", 0.0}, u),
      ValidationError);
}

TEST_CASE("integration is deterministic") {
  auto sys = oracle::initialized("kundur_two_area");
  const auto c = oracle::bundled("kundur_two_area");
  auto a = integrate(sys.problem, 0.0, 0.3, StepperKind::trapezoid, StepController::fixed(2e-3),
                     NewtonConfig{}, c.events);
  auto b = integrate(sys.problem, 0.0, 0.3, StepperKind::trapezoid, StepController::fixed(2e-3),
                     NewtonConfig{}, c.events);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK((a.values[k].array() == b.values[k].array()).all());
}

TEST_CASE("step size underflow when Newton cannot converge") {
  auto p = oracle::lag_problem(1.0, 2.0, 1.0, 0.0);
  NewtonConfig cfg;
  cfg.tol = 1e-300;  // unreachable
  cfg.max_iter = 1;
  auto ctrl = StepController::adaptive(1e-3, 1e-3, 1e-2, 1e-3, 0.1);
  CHECK_THROWS_AS(integrate(p, 0.0, 1.0, StepperKind::trapezoid, ctrl, cfg, {}), StepSizeUnderflow);
}
