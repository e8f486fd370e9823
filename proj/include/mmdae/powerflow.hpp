#pragma once

#include "mmdae/case.hpp"
#include "mmdae/dae.hpp"
#include "mmdae/errors.hpp"

#include <complex>
#include <vector>

namespace mmdae::powerflow {

struct PowerFlowSolution {
  std::vector<int> bus_ids;  // case order
  Eigen::VectorXd vm;        // p.u.
  Eigen::VectorXd va;        // rad
  /// Complex output P + jQ of each generator, case order, system p.u.
  std::vector<std::complex<double>> generator_power;
  int iterations = 0;
  double mismatch = 0.0;
  std::vector<double> mismatch_history;  // infinity norm before each update, then final

  std::complex<double> voltage(int bus_id) const;
};

class NonConvergence : public SolverError {
 public:
  NonConvergence(const std::string& what, int worst_bus, double mismatch)
      : SolverError(what), worst_bus_(worst_bus), mismatch_(mismatch) {}
  int worst_bus() const { return worst_bus_; }
  double mismatch() const { return mismatch_; }

 private:
  int worst_bus_;
  double mismatch_;
};

/// Polar Newton-Raphson on P (pv, pq) and Q (pq) mismatches. Starts from the
/// buses' v0/theta0.
PowerFlowSolution nr_powerflow(const SystemCase& c, double tol = 1e-8, int max_iter = 20);

struct DynamicSystem {
  DaeProblem problem;
  ConsistencyReport report;
  std::vector<machines::GenrouInit> machines;  // case order
};

/// Builds every component, back-initializes machines and controllers from
/// the power flow, and checks consistency at `tol` (throws on failure).
DynamicSystem init_dynamics(const SystemCase& c, const PowerFlowSolution& pf, double tol = 1e-6);

/// Network component for a case: loads become shunts (constant impedance,
/// using the solved voltage) or constant-power injections.
std::shared_ptr<network::NetworkComponent> make_network(const SystemCase& c,
                                                        const PowerFlowSolution& pf);

}  // namespace mmdae::powerflow
