#include "mmdae/powerflow.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mmdae::powerflow {

namespace {

using network::BusType;
using network::Complex;

struct Buses {
  std::vector<int> pvpq;  // positions in case order
  std::vector<int> pq;
  int slack = -1;
};

Buses classify(const SystemCase& c) {
  Buses b;
  for (int i = 0; i < static_cast<int>(c.buses.size()); ++i) {
    switch (c.buses[i].type) {
      case BusType::slack: b.slack = i; break;
      case BusType::pv: b.pvpq.push_back(i); break;
      case BusType::pq:
        b.pvpq.push_back(i);
        b.pq.push_back(i);
        break;
    }
  }
  return b;
}

network::AdmittanceMatrix case_ybus(const SystemCase& c) {
  return network::build_ybus(c.buses, c.lines);
}

}  // namespace

Complex PowerFlowSolution::voltage(int bus_id) const {
  for (std::size_t i = 0; i < bus_ids.size(); ++i)
    if (bus_ids[i] == bus_id) return std::polar(vm[i], va[i]);
  throw ValidationError("power flow: no bus " + std::to_string(bus_id));
}

PowerFlowSolution nr_powerflow(const SystemCase& c, double tol, int max_iter) {
  c.validate();
  network::check_connected(c.buses, c.lines);
  const int nb = static_cast<int>(c.buses.size());
  const Buses kinds = classify(c);
  const auto Y = case_ybus(c);

  // Scheduled injections: generation minus load.
  Eigen::VectorXcd sbus = Eigen::VectorXcd::Zero(nb);
  network::BusIndex index(c.buses);
  for (int i = 0; i < nb; ++i) sbus[i] = -Complex(c.buses[i].p_load, c.buses[i].q_load);
  for (const auto& g : c.generators) sbus[index.at(g.params.bus)] += g.p;

  PowerFlowSolution sol;
  sol.vm.resize(nb);
  sol.va.resize(nb);
  for (int i = 0; i < nb; ++i) {
    sol.bus_ids.push_back(c.buses[i].id);
    sol.vm[i] = c.buses[i].v0;
    sol.va[i] = c.buses[i].theta0;
  }

  const int npvpq = static_cast<int>(kinds.pvpq.size());
  const int npq = static_cast<int>(kinds.pq.size());
  const int dim = npvpq + npq;
  std::vector<int> col_va(nb, -1), col_vm(nb, -1);
  for (int k = 0; k < npvpq; ++k) col_va[kinds.pvpq[k]] = k;
  for (int k = 0; k < npq; ++k) col_vm[kinds.pq[k]] = npvpq + k;

  Eigen::VectorXcd V(nb);
  auto refresh_v = [&] {
    for (int i = 0; i < nb; ++i) V[i] = std::polar(sol.vm[i], sol.va[i]);
  };
  Eigen::VectorXd F(dim);
  int worst = kinds.slack;
  auto mismatch = [&] {
    const Eigen::VectorXcd mis = V.cwiseProduct((Y * V).conjugate()) - sbus;
    double norm = 0.0;
    for (int k = 0; k < npvpq; ++k) {
      F[k] = mis[kinds.pvpq[k]].real();
      if (std::abs(F[k]) > norm) {
        norm = std::abs(F[k]);
        worst = kinds.pvpq[k];
      }
    }
    for (int k = 0; k < npq; ++k) {
      F[npvpq + k] = mis[kinds.pq[k]].imag();
      if (std::abs(F[npvpq + k]) > norm) {
        norm = std::abs(F[npvpq + k]);
        worst = kinds.pq[k];
      }
    }
    return norm;
  };

  refresh_v();
  double norm = mismatch();
  sol.mismatch_history.push_back(norm);
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  int iter = 0;
  while (norm > tol) {
    if (iter >= max_iter) {
      std::ostringstream msg;
      msg << "power flow did not converge in " << max_iter << " iterations; worst mismatch "
          << norm << " at bus " << c.buses[worst].id;
      throw NonConvergence(msg.str(), c.buses[worst].id, norm);
    }
    // dS/dVa = j diag(V) conj(diag(I) - Y diag(V))
    // dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
    const Eigen::VectorXcd I = Y * V;
    const Eigen::VectorXcd Vn = V.cwiseQuotient(sol.vm.cast<Complex>());
    std::vector<Triplet> trips;
    trips.reserve(4 * Y.nonZeros() + 2 * nb);
    auto put = [&](int row, int col, Complex dva, Complex dvm) {
      if (col_va[col] >= 0) {
        if (col_va[row] >= 0) trips.emplace_back(col_va[row], col_va[col], dva.real());
        if (col_vm[row] >= 0) trips.emplace_back(col_vm[row], col_va[col], dva.imag());
      }
      if (col_vm[col] >= 0) {
        if (col_va[row] >= 0) trips.emplace_back(col_va[row], col_vm[col], dvm.real());
        if (col_vm[row] >= 0) trips.emplace_back(col_vm[row], col_vm[col], dvm.imag());
      }
    };
    for (int col = 0; col < Y.outerSize(); ++col) {
      for (network::AdmittanceMatrix::InnerIterator it(Y, col); it; ++it) {
        const int row = static_cast<int>(it.row());
        const Complex y = it.value();
        const Complex dva = Complex(0, 1) * V[row] * std::conj(-y * V[col]);
        const Complex dvm = V[row] * std::conj(y * Vn[col]);
        put(row, col, dva, dvm);
      }
    }
    for (int i = 0; i < nb; ++i) {
      const Complex dva = Complex(0, 1) * V[i] * std::conj(I[i]);
      const Complex dvm = std::conj(I[i]) * Vn[i];
      put(i, i, dva, dvm);
    }
    SparseMatrix J(dim, dim);
    J.setFromTriplets(trips.begin(), trips.end());
    J.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success)
      throw SolverError("power flow Jacobian is singular at iteration " + std::to_string(iter));
    const Eigen::VectorXd dx = lu.solve(F);
    for (int k = 0; k < npvpq; ++k) sol.va[kinds.pvpq[k]] -= dx[k];
    for (int k = 0; k < npq; ++k) sol.vm[kinds.pq[k]] -= dx[npvpq + k];
    refresh_v();
    ++iter;
    norm = mismatch();
    sol.mismatch_history.push_back(norm);
    if (!std::isfinite(norm)) {
      throw NonConvergence("power flow diverged", c.buses[worst].id, norm);
    }
  }
  sol.iterations = iter;
  sol.mismatch = norm;

  const Eigen::VectorXcd S = V.cwiseProduct((Y * V).conjugate());
  for (const auto& g : c.generators) {
    const int i = index.at(g.params.bus);
    // Each generator bus carries one machine; it supplies the bus load too.
    sol.generator_power.push_back(S[i] + Complex(c.buses[i].p_load, c.buses[i].q_load));
  }
  return sol;
}

std::shared_ptr<network::NetworkComponent> make_network(const SystemCase& c,
                                                        const PowerFlowSolution& pf) {
  std::vector<network::BusShunt> shunts;
  std::vector<network::PowerLoad> loads;
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    const auto& b = c.buses[i];
    if (b.p_load == 0.0 && b.q_load == 0.0) continue;
    const Complex s(b.p_load, b.q_load);
    if (c.load_model == LoadModel::constant_power) {
      loads.push_back({b.id, s});
    } else {
      const double v = pf.vm[static_cast<Eigen::Index>(i)];
      shunts.push_back({b.id, std::conj(s) / (v * v)});
    }
  }
  return std::make_shared<network::NetworkComponent>(c.buses, c.lines, std::move(shunts),
                                                     std::move(loads));
}

DynamicSystem init_dynamics(const SystemCase& c, const PowerFlowSolution& pf, double tol) {
  c.validate();
  if (pf.bus_ids.size() != c.buses.size())
    throw ValidationError("init: power flow solution does not match the case");

  DynamicSystem sys;
  std::vector<std::shared_ptr<Component>> comps;
  std::unordered_map<std::string, const machines::ExciterParams*> exciter_of;
  std::unordered_map<std::string, const machines::GovernorParams*> governor_of;
  for (const auto& e : c.exciters) exciter_of[e.generator] = &e;
  for (const auto& g : c.governors) governor_of[g.generator] = &g;

  // Buses with scheduled injection must host a machine to absorb it.
  {
    network::BusIndex index(c.buses);
    std::vector<bool> has_gen(c.buses.size(), false);
    for (const auto& g : c.generators) has_gen[index.at(g.params.bus)] = true;
    const auto Y = case_ybus(c);
    Eigen::VectorXcd V(c.buses.size());
    for (std::size_t i = 0; i < c.buses.size(); ++i) V[i] = std::polar(pf.vm[i], pf.va[i]);
    const Eigen::VectorXcd S = V.cwiseProduct((Y * V).conjugate());
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
      const Complex gen = S[i] + Complex(c.buses[i].p_load, c.buses[i].q_load);
      if (!has_gen[i] && std::abs(gen) > tol)
        throw ValidationError("init: bus " + std::to_string(c.buses[i].id) +
                              " injects power but has no generator");
    }
  }

  std::vector<std::shared_ptr<Component>> controllers;
  for (std::size_t k = 0; k < c.generators.size(); ++k) {
    const auto& g = c.generators[k];
    const Complex v = pf.voltage(g.params.bus);
    machines::GenrouInit init;
    try {
      init = machines::genrou_initialize(g.params, v, pf.generator_power[k]);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      throw ValidationError("init: generator '" + g.params.id + "': " + e.what());
    }
    sys.machines.push_back(init);

    blocks::Input vf = blocks::Input::value(init.vf0);
    blocks::Input tm = blocks::Input::value(init.tm0);
    if (auto it = exciter_of.find(g.params.id); it != exciter_of.end()) {
      machines::ExciterParams ep = *it->second;
      ep.vref = machines::exciter_vref(ep, std::abs(v), init.vf0);
      auto exc = std::make_shared<machines::ExciterComponent>(ep, g.params.bus);
      vf = blocks::Input::of(exc->output());
      controllers.push_back(exc);
    }
    if (auto it = governor_of.find(g.params.id); it != governor_of.end()) {
      machines::GovernorParams gp = *it->second;
      gp.tref = init.tm0;
      auto gov = std::make_shared<machines::GovernorComponent>(gp);
      tm = blocks::Input::of(gov->output());
      controllers.push_back(gov);
    }
    comps.push_back(std::make_shared<machines::GenrouComponent>(g.params, vf, tm));
  }
  for (auto& ctl : controllers) comps.push_back(ctl);
  comps.push_back(make_network(c, pf));

  DaeProblem p = assemble_problem(std::move(comps));
  const auto& layout = p.layout();
  InitialCondition ic = p.initial();
  Eigen::VectorXd z = ic.stacked();
  auto set = [&](const std::string& name, double value) { z[layout.at(name, "init")] = value; };

  for (std::size_t k = 0; k < c.generators.size(); ++k) {
    const auto& id = c.generators[k].params.id;
    const auto& s = sys.machines[k].state;
    const double vals[12] = {s.delta, s.omega, s.e1q,   s.e1d,   s.e2d,    s.e2q,
                             s.id,    s.iq,    s.psi2d, s.psi2q, s.xadifd, s.xaqi1q};
    const auto names = machines::GenrouComponent::state_names(id);
    for (std::size_t j = 0; j < names.size(); ++j) set(names[j], vals[j]);
    if (auto it = exciter_of.find(id); it != exciter_of.end())
      set(it->second->id + ".vf", sys.machines[k].vf0);
    if (auto it = governor_of.find(id); it != governor_of.end()) {
      const std::string& gid = it->second->id;
      set(gid + ".xg", sys.machines[k].tm0);
      set(gid + ".xl", sys.machines[k].tm0);
      set(gid + ".tm", sys.machines[k].tm0);
    }
  }
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    const Complex v = std::polar(pf.vm[i], pf.va[i]);
    set(network::vr_name(c.buses[i].id), v.real());
    set(network::vi_name(c.buses[i].id), v.imag());
  }

  const auto n = static_cast<Eigen::Index>(p.n());
  ic.x = z.head(n);
  ic.y = z.tail(z.size() - n);
  sys.problem = p.with_initial(ic);
  sys.report = check_consistency(sys.problem, tol);
  if (!sys.report.pass) {
    std::ostringstream msg;
    msg << "init: inconsistent initial condition (|f| = " << sys.report.f_norm << " at '"
        << sys.report.worst_f << "', |g| = " << sys.report.g_norm << " at '"
        << sys.report.worst_g << "')";
    throw SolverError(msg.str());
  }
  return sys;
}

}  // namespace mmdae::powerflow
