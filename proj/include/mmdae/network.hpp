#pragma once

#include "mmdae/dae.hpp"

#include <complex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mmdae {
struct Event;
}

namespace mmdae::network {

using Complex = std::complex<double>;
using AdmittanceMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;

enum class BusType { slack, pv, pq };

struct BusRecord {
  int id = 0;
  BusType type = BusType::pq;
  double v0 = 1.0;
  double theta0 = 0.0;
  double p_load = 0.0;
  double q_load = 0.0;
};

struct LineRecord {
  std::string id;
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double b = 0.0;  // total line charging
  bool in_service = true;

  Complex series_admittance() const { return 1.0 / Complex(r, x); }
};

/// Constant-impedance shunt at a bus (loads folded at t0).
struct BusShunt {
  int bus = 0;
  Complex admittance;
};

/// Constant-power load, consuming P + jQ.
struct PowerLoad {
  int bus = 0;
  Complex power;
};

/// Bus id to dense position.
class BusIndex {
 public:
  BusIndex() = default;
  explicit BusIndex(std::span<const BusRecord> buses);
  int at(int bus_id) const;
  bool contains(int bus_id) const { return index_.count(bus_id) != 0; }
  std::size_t size() const { return index_.size(); }

 private:
  std::unordered_map<int, int> index_;
};

/// Throws IslandError when the in-service lines leave more than one island.
void check_connected(std::span<const BusRecord> buses, std::span<const LineRecord> lines);

/// Pi-model stamping of the in-service lines plus bus shunts.
AdmittanceMatrix build_ybus(std::span<const BusRecord> buses, std::span<const LineRecord> lines,
                            std::span<const BusShunt> shunts = {});

/// Nodal current balance I_inj - Y V, real and imaginary parts interleaved
/// per bus. `injections` are the external (machine) currents; constant-power
/// loads add -conj(S / V).
Eigen::VectorXd network_residuals(const AdmittanceMatrix& Y, const Eigen::VectorXcd& V,
                                  const Eigen::VectorXcd& injections,
                                  std::span<const PowerLoad> loads = {},
                                  const BusIndex* index = nullptr);

/// Switchable network with its current admittance matrix.
class NetworkState {
 public:
  NetworkState(std::vector<BusRecord> buses, std::vector<LineRecord> lines,
               std::vector<BusShunt> shunts = {});

  const AdmittanceMatrix& ybus() const { return ybus_; }
  const std::vector<LineRecord>& lines() const { return lines_; }

  /// Trip or reconnect a line; returns the positions of buses whose rows
  /// changed. Throws ValidationError on double trip/reconnect and
  /// IslandError (state untouched) when the trip would split the network.
  std::vector<int> apply_event(const Event& e);

 private:
  std::vector<BusRecord> buses_;
  std::vector<LineRecord> lines_;
  std::vector<BusShunt> shunts_;
  BusIndex index_;
  AdmittanceMatrix ybus_;
};

std::string vr_name(int bus);
std::string vi_name(int bus);

/// Algebraic network layer: variables bus<k>.vr / bus<k>.vi, one current
/// balance per bus. Line statuses live in the discrete state.
class NetworkComponent : public Component {
 public:
  NetworkComponent(std::vector<BusRecord> buses, std::vector<LineRecord> lines,
                   std::vector<BusShunt> shunts = {}, std::vector<PowerLoad> loads = {});

  const std::string& id() const override { return id_; }
  std::vector<VariableDecl> variables() const override;
  std::vector<DiscreteDecl> discrete() const override;
  void bind(const VariableLayout& layout, const DiscreteLayout& discrete) override;
  void residual(const EvalPoint& at, std::span<double> out) const override;
  void jacobian(const EvalPoint& at, JacobianStamper& stamps) const override;
  void check_discrete(std::span<const double> u) const override;

 private:
  struct BoundLine {
    int from_vr, from_vi, to_vr, to_vi;
    int status;
    Complex series;
    Complex half_shunt;
  };

  std::string id_ = "network";
  std::vector<BusRecord> buses_;
  std::vector<LineRecord> lines_;
  std::vector<BusShunt> shunts_;
  std::vector<PowerLoad> loads_;
  std::vector<BoundLine> bound_;
  std::vector<int> status_index_;
  std::vector<std::pair<int, int>> shunt_rows_;
  std::vector<std::pair<int, int>> load_rows_;
};

}  // namespace mmdae::network
