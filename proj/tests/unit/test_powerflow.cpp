#include "mmdae/errors.hpp"
#include "mmdae/powerflow.hpp"
#include "mmdae/solvers.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace mmdae;

TEST_CASE("bisection oracle reproduces the closed-form two-bus values") {
  const auto s = oracle::two_bus_by_bisection(0.1, 0.1);
  // sin(2 theta) = -0.02 from the P balance with V2 = cos(theta).
  CHECK(s.theta == doctest::Approx(-0.5 * std::asin(0.02)).epsilon(1e-14));
  CHECK(std::abs(s.theta - (-0.0100007)) < 1e-7);
  CHECK(std::abs(s.v - 0.9999500) < 1e-7);
}

TEST_CASE("two-bus power flow matches the bisection oracle") {
  const auto c = oracle::bundled("two_bus");
  const auto pf = powerflow::nr_powerflow(c);
  const auto ref = oracle::two_bus_by_bisection(0.1, 0.1);
  CHECK(std::abs(pf.va[1] - ref.theta) < 1e-10);
  CHECK(std::abs(pf.vm[1] - ref.v) < 1e-10);
  CHECK(pf.vm[0] == 1.0);
  CHECK(pf.va[0] == 0.0);
  CHECK(pf.mismatch <= 1e-8);
}

TEST_CASE("quadratic tail on the two-bus case") {
  const auto pf = powerflow::nr_powerflow(oracle::bundled("two_bus"), 1e-14);
  const auto& m = pf.mismatch_history;
  REQUIRE(m.size() >= 3);
  // Last productive step gains at least four orders of magnitude.
  const std::size_t k = m.size() - 1;
  CHECK(m[k] <= 1e-4 * m[k - 1]);
  CHECK(m[k - 1] <= 10.0 * m[k - 2] * m[k - 2]);
}

TEST_CASE("slack-only network is solved without iterations") {
  SystemCase c;
  c.name = "slack";
  c.buses.push_back({1, network::BusType::slack, 1.0, 0.0});
  const auto pf = powerflow::nr_powerflow(c);
  CHECK(pf.iterations == 0);
  CHECK(pf.vm[0] == 1.0);
  CHECK(pf.va[0] == 0.0);

  const auto sys = powerflow::init_dynamics(c, pf);
  CHECK(sys.problem.n() == 0);
  CHECK(sys.problem.m() == 2);
  CHECK(sys.report.pass);
}

TEST_CASE("bundled Kundur case converges quickly") {
  const auto pf = powerflow::nr_powerflow(oracle::bundled("kundur_two_area"));
  CHECK(pf.iterations < 10);
  CHECK(pf.mismatch <= 1e-8);
  CHECK(pf.generator_power.size() == 4);
  // PV setpoints are held.
  CHECK(pf.vm[0] == 1.03);
  CHECK(pf.vm[1] == 1.01);
  CHECK(pf.generator_power[0].real() == doctest::Approx(7.0).epsilon(1e-9));
}

TEST_CASE("non-convergence names the worst bus") {
  auto c = oracle::bundled("two_bus");
  c.buses[1].p_load = 100.0;  // beyond the line's transfer limit
  try {
    powerflow::nr_powerflow(c);
    FAIL("expected non-convergence");
  } catch (const powerflow::NonConvergence& e) {
    CHECK(e.worst_bus() == 2);
  } catch (const SolverError&) {
    // A singular Jacobian is also an acceptable failure here.
  }
}

TEST_CASE("initialized bundled case passes the consistency check") {
  auto sys = oracle::initialized("kundur_two_area");
  CHECK(sys.report.pass);
  CHECK(sys.report.f_norm < 1e-6);
  CHECK(sys.report.g_norm < 1e-6);
}

TEST_CASE("zero-disturbance run stays at equilibrium for every stepper") {
  auto sys = oracle::initialized("kundur_two_area");
  const auto& p = sys.problem;
  const Eigen::VectorXd z0 = p.initial().stacked();
  for (StepperKind k : {StepperKind::implicit_euler, StepperKind::trapezoid, StepperKind::bdf2}) {
    auto traj = integrate(p, 0.0, 1.0, k, StepController::fixed(1e-2), NewtonConfig{}, {});
    double drift = 0.0;
    for (const auto& row : traj.values) drift = std::max(drift, (row - z0).lpNorm<Eigen::Infinity>());
    CHECK(drift <= 1e-6);
  }
}

TEST_CASE("power injection without a machine is rejected") {
  auto c = oracle::bundled("two_bus");
  c.generators.clear();
  const auto pf = powerflow::nr_powerflow(c);
  CHECK_THROWS_AS(powerflow::init_dynamics(c, pf), ValidationError);
}
