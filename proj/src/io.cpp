#include "mmdae/io.hpp"

#include "mmdae/errors.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace mmdae {

namespace {

constexpr std::string_view kMarker = "# event ";

double parse_double(std::string_view s, int line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("trajectory: bad number '" + std::string(s) + "'", line, 1);
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf.data(), ptr);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  if (traj.size() == 0) throw ValidationError("trajectory: nothing to write");
  out << 't';
  for (const auto& n : traj.names) out << ',' << n;
  out << '\n';
  std::size_t next_event = 0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    // Pre-event rows share the event time; markers follow the last of them.
    while (next_event < traj.events.size() && traj.events[next_event].time < traj.times[k] &&
           k > 0) {
      const auto& e = traj.events[next_event++];
      out << kMarker << e.id << " t=" << format_double(e.time) << '\n';
    }
    out << format_double(traj.times[k]);
    for (Eigen::Index i = 0; i < traj.values[k].size(); ++i)
      out << ',' << format_double(traj.values[k][i]);
    out << '\n';
  }
  for (; next_event < traj.events.size(); ++next_event) {
    const auto& e = traj.events[next_event];
    out << kMarker << e.id << " t=" << format_double(e.time) << '\n';
  }
  if (!out) throw Error("trajectory: write failed");
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("trajectory: cannot open '" + path.string() + "' for writing");
  write_trajectory_csv(traj, out);
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("trajectory: cannot open '" + path.string() + "'");
  Trajectory traj;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.rfind(kMarker, 0) == 0) {
        const std::string rest = line.substr(kMarker.size());
        const auto sep = rest.rfind(" t=");
        if (sep == std::string::npos) throw ParseError("trajectory: bad marker", lineno, 1);
        traj.events.push_back({parse_double(std::string_view(rest).substr(sep + 3), lineno),
                               rest.substr(0, sep)});
      }
      continue;
    }
    const auto cells = split(line);
    if (!header) {
      if (cells.empty() || cells[0] != "t") throw ParseError("trajectory: bad header", lineno, 1);
      for (std::size_t i = 1; i < cells.size(); ++i) traj.names.emplace_back(cells[i]);
      header = true;
      continue;
    }
    if (cells.size() != traj.names.size() + 1)
      throw ParseError("trajectory: wrong column count", lineno, 1);
    traj.times.push_back(parse_double(cells[0], lineno));
    Eigen::VectorXd row(static_cast<Eigen::Index>(traj.names.size()));
    for (std::size_t i = 1; i < cells.size(); ++i)
      row[static_cast<Eigen::Index>(i - 1)] = parse_double(cells[i], lineno);
    traj.values.push_back(std::move(row));
  }
  if (!header) throw ParseError("trajectory: empty file", lineno, 1);
  return traj;
}

}  // namespace mmdae
