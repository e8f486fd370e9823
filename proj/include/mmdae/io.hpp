#pragma once

#include "mmdae/dae.hpp"

#include <filesystem>
#include <iosfwd>

namespace mmdae {

/// Header `t,<names>`, one row per recorded step, shortest round-trip
/// formatting. Event markers go after the last row at or before their time.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

/// Reads a file produced by write_trajectory_csv. Marker lines restore
/// `events`; stats are not stored.
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace mmdae
