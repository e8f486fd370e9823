#pragma once

#include "mmdae/machines.hpp"
#include "mmdae/network.hpp"
#include "mmdae/solvers.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmdae {

enum class LoadModel { constant_impedance, constant_power };

struct LoadRecord {
  std::string id;
  int bus = 0;
  double p = 0.0;  // consumption, system p.u.
  double q = 0.0;
};

struct GeneratorRecord {
  machines::GenrouParams params;  // converted to the system base
  double p = 0.0;                 // scheduled output for PV buses, system p.u.
  double mva = 100.0;             // machine base the raw parameters were given on
};

struct SimulationDefaults {
  double tf = 5.0;
  std::string solver = "trap";
  double h = 1e-3;
  std::optional<double> rtol;
  std::optional<double> atol;
};

/// A validated case. All powers are per unit on `base_mva`; machine
/// impedances and inertia are already converted from their own base.
struct SystemCase {
  std::string name;
  double base_mva = 100.0;
  double base_freq = 60.0;
  std::vector<network::BusRecord> buses;  // p_load/q_load aggregated from `loads`
  std::vector<network::LineRecord> lines;
  std::vector<LoadRecord> loads;
  std::vector<GeneratorRecord> generators;
  std::vector<machines::ExciterParams> exciters;
  std::vector<machines::GovernorParams> governors;
  EventSchedule events;
  LoadModel load_model = LoadModel::constant_impedance;
  SimulationDefaults simulation;

  /// Checks every invariant; throws ValidationError naming the element.
  void validate() const;

  const GeneratorRecord* find_generator(const std::string& id) const;
};

inline constexpr int kCaseSchemaVersion = 1;

/// Parses and validates a case document. Unknown keys are rejected.
SystemCase parse_case(std::string_view text);
SystemCase load_case(const std::filesystem::path& path);

}  // namespace mmdae
