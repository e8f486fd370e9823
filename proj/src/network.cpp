#include "mmdae/network.hpp"

#include "mmdae/errors.hpp"
#include "mmdae/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmdae::network {

BusIndex::BusIndex(std::span<const BusRecord> buses) {
  for (const auto& b : buses) {
    if (!index_.emplace(b.id, static_cast<int>(index_.size())).second)
      throw ValidationError("duplicate bus id " + std::to_string(b.id));
  }
}

int BusIndex::at(int bus_id) const {
  auto it = index_.find(bus_id);
  if (it == index_.end()) throw ValidationError("unknown bus id " + std::to_string(bus_id));
  return it->second;
}

namespace {

int find_root(std::vector<int>& parent, int i) {
  while (parent[static_cast<std::size_t>(i)] != i) {
    parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
    i = parent[static_cast<std::size_t>(i)];
  }
  return i;
}

void validate_line(const LineRecord& l) {
  if (l.from == l.to) throw ValidationError("line '" + l.id + "' connects a bus to itself");
  if (l.x == 0.0 || !std::isfinite(l.x) || !std::isfinite(l.r) || !std::isfinite(l.b))
    throw ValidationError("line '" + l.id + "' needs a finite nonzero reactance");
}

template <class StatusFn>
void check_connected_impl(std::span<const BusRecord> buses, std::span<const LineRecord> lines,
                          StatusFn in_service) {
  if (buses.empty()) return;
  BusIndex index(buses);
  std::vector<int> parent(buses.size());
  std::iota(parent.begin(), parent.end(), 0);
  int components = static_cast<int>(buses.size());
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (!in_service(k)) continue;
    const int a = find_root(parent, index.at(lines[k].from));
    const int b = find_root(parent, index.at(lines[k].to));
    if (a != b) {
      parent[static_cast<std::size_t>(a)] = b;
      --components;
    }
  }
  if (components > 1) {
    throw IslandError("network splits into " + std::to_string(components) +
                      " islands with the current line statuses");
  }
}

}  // namespace

void check_connected(std::span<const BusRecord> buses, std::span<const LineRecord> lines) {
  check_connected_impl(buses, lines, [&](std::size_t k) { return lines[k].in_service; });
}

AdmittanceMatrix build_ybus(std::span<const BusRecord> buses, std::span<const LineRecord> lines,
                            std::span<const BusShunt> shunts) {
  BusIndex index(buses);
  for (const auto& l : lines) {
    validate_line(l);
    index.at(l.from);
    index.at(l.to);
  }
  check_connected(buses, lines);

  std::vector<Eigen::Triplet<Complex, int>> trips;
  for (const auto& l : lines) {
    if (!l.in_service) continue;
    const int f = index.at(l.from);
    const int t = index.at(l.to);
    const Complex ys = l.series_admittance();
    const Complex ysh(0.0, 0.5 * l.b);
    trips.emplace_back(f, f, ys + ysh);
    trips.emplace_back(t, t, ys + ysh);
    trips.emplace_back(f, t, -ys);
    trips.emplace_back(t, f, -ys);
  }
  for (const auto& s : shunts) {
    const int k = index.at(s.bus);
    trips.emplace_back(k, k, s.admittance);
  }
  const auto nb = static_cast<int>(buses.size());
  AdmittanceMatrix Y(nb, nb);
  Y.setFromTriplets(trips.begin(), trips.end());
  Y.makeCompressed();
  return Y;
}

Eigen::VectorXd network_residuals(const AdmittanceMatrix& Y, const Eigen::VectorXcd& V,
                                  const Eigen::VectorXcd& injections,
                                  std::span<const PowerLoad> loads, const BusIndex* index) {
  if (Y.rows() != V.size() || V.size() != injections.size())
    throw ValidationError("network_residuals: dimension mismatch");
  Eigen::VectorXcd I = injections - Y * V;
  for (const auto& load : loads) {
    if (!index) throw ValidationError("network_residuals: constant-power loads need a bus index");
    const int k = index->at(load.bus);
    if (std::abs(V[k]) < 1e-6) {
      throw EvaluationError("bus" + std::to_string(load.bus),
                            "voltage magnitude below 1e-6 at constant-power load bus " +
                                std::to_string(load.bus));
    }
    I[k] -= std::conj(load.power / V[k]);
  }
  Eigen::VectorXd out(2 * V.size());
  for (Eigen::Index k = 0; k < V.size(); ++k) {
    out[2 * k] = I[k].real();
    out[2 * k + 1] = I[k].imag();
  }
  return out;
}

// ---------------------------------------------------------------------------

NetworkState::NetworkState(std::vector<BusRecord> buses, std::vector<LineRecord> lines,
                           std::vector<BusShunt> shunts)
    : buses_(std::move(buses)),
      lines_(std::move(lines)),
      shunts_(std::move(shunts)),
      index_(buses_),
      ybus_(build_ybus(buses_, lines_, shunts_)) {}

std::vector<int> NetworkState::apply_event(const Event& e) {
  if (e.action != EventAction::line_trip && e.action != EventAction::line_reconnect)
    throw ValidationError("event '" + e.id + "' is not a line switching event");
  auto it = std::find_if(lines_.begin(), lines_.end(),
                         [&](const LineRecord& l) { return l.id == e.target; });
  if (it == lines_.end()) throw ValidationError("event '" + e.id + "' targets unknown line '" + e.target + "'");
  const bool trip = e.action == EventAction::line_trip;
  if (trip && !it->in_service)
    throw ValidationError("event '" + e.id + "': line '" + e.target + "' is already out");
  if (!trip && it->in_service)
    throw ValidationError("event '" + e.id + "': line '" + e.target + "' is already in");

  std::vector<LineRecord> next = lines_;
  next[static_cast<std::size_t>(it - lines_.begin())].in_service = !trip;
  ybus_ = build_ybus(buses_, next, shunts_);
  lines_ = std::move(next);
  std::vector<int> changed{index_.at(it->from), index_.at(it->to)};
  std::sort(changed.begin(), changed.end());
  return changed;
}

// ---------------------------------------------------------------------------

std::string vr_name(int bus) { return "bus" + std::to_string(bus) + ".vr"; }
std::string vi_name(int bus) { return "bus" + std::to_string(bus) + ".vi"; }

NetworkComponent::NetworkComponent(std::vector<BusRecord> buses, std::vector<LineRecord> lines,
                                   std::vector<BusShunt> shunts, std::vector<PowerLoad> loads)
    : buses_(std::move(buses)),
      lines_(std::move(lines)),
      shunts_(std::move(shunts)),
      loads_(std::move(loads)) {
  BusIndex index(buses_);
  for (const auto& l : lines_) {
    validate_line(l);
    index.at(l.from);
    index.at(l.to);
  }
  for (const auto& s : shunts_) index.at(s.bus);
  for (const auto& p : loads_) index.at(p.bus);
}

std::vector<VariableDecl> NetworkComponent::variables() const {
  std::vector<VariableDecl> vars;
  vars.reserve(2 * buses_.size());
  for (const auto& b : buses_) {
    vars.push_back({vr_name(b.id), VariableKind::algebraic, 0.0});
    vars.push_back({vi_name(b.id), VariableKind::algebraic, 0.0});
  }
  return vars;
}

std::vector<DiscreteDecl> NetworkComponent::discrete() const {
  std::vector<DiscreteDecl> out;
  for (const auto& l : lines_) out.push_back({line_status_name(l.id), l.in_service ? 1.0 : 0.0});
  return out;
}

void NetworkComponent::bind(const VariableLayout& layout, const DiscreteLayout& discrete) {
  bound_.clear();
  status_index_.clear();
  for (const auto& l : lines_) {
    BoundLine b;
    b.from_vr = layout.at(vr_name(l.from), id_);
    b.from_vi = layout.at(vi_name(l.from), id_);
    b.to_vr = layout.at(vr_name(l.to), id_);
    b.to_vi = layout.at(vi_name(l.to), id_);
    b.status = discrete.at(line_status_name(l.id), id_);
    b.series = l.series_admittance();
    b.half_shunt = Complex(0.0, 0.5 * l.b);
    bound_.push_back(b);
    status_index_.push_back(b.status);
  }
  shunt_rows_.clear();
  for (const auto& s : shunts_)
    shunt_rows_.emplace_back(layout.at(vr_name(s.bus), id_), layout.at(vi_name(s.bus), id_));
  load_rows_.clear();
  for (const auto& p : loads_)
    load_rows_.emplace_back(layout.at(vr_name(p.bus), id_), layout.at(vi_name(p.bus), id_));
}

namespace {

// Subtracts c * V_col from the current balance of a bus.
void sub_product(std::span<double> out, int row_re, int row_im, Complex c, double vr, double vi) {
  out[static_cast<std::size_t>(row_re)] -= c.real() * vr - c.imag() * vi;
  out[static_cast<std::size_t>(row_im)] -= c.real() * vi + c.imag() * vr;
}

void stamp_product(JacobianStamper& s, int row_re, int row_im, int col_re, int col_im, Complex c) {
  s.add(row_re, col_re, -c.real());
  s.add(row_re, col_im, c.imag());
  s.add(row_im, col_re, -c.imag());
  s.add(row_im, col_im, -c.real());
}

}  // namespace

void NetworkComponent::residual(const EvalPoint& at, std::span<double> out) const {
  for (const auto& l : bound_) {
    const double s = at.u[static_cast<std::size_t>(l.status)];
    if (s == 0.0) continue;
    const Complex self = s * (l.series + l.half_shunt);
    const Complex mutual = -s * l.series;
    const double fr = at[l.from_vr], fi = at[l.from_vi];
    const double tr = at[l.to_vr], ti = at[l.to_vi];
    sub_product(out, l.from_vr, l.from_vi, self, fr, fi);
    sub_product(out, l.from_vr, l.from_vi, mutual, tr, ti);
    sub_product(out, l.to_vr, l.to_vi, self, tr, ti);
    sub_product(out, l.to_vr, l.to_vi, mutual, fr, fi);
  }
  for (std::size_t k = 0; k < shunts_.size(); ++k) {
    const int r = shunt_rows_[k].first, i = shunt_rows_[k].second;
    sub_product(out, r, i, shunts_[k].admittance, at[r], at[i]);
  }
  for (std::size_t k = 0; k < loads_.size(); ++k) {
    const int r = load_rows_[k].first, i = load_rows_[k].second;
    const Complex V(at[r], at[i]);
    if (std::abs(V) < 1e-6) {
      throw EvaluationError(vr_name(loads_[k].bus),
                            "voltage magnitude below 1e-6 at constant-power load bus " +
                                std::to_string(loads_[k].bus));
    }
    const Complex I = -std::conj(loads_[k].power / V);
    out[static_cast<std::size_t>(r)] += I.real();
    out[static_cast<std::size_t>(i)] += I.imag();
  }
}

void NetworkComponent::jacobian(const EvalPoint& at, JacobianStamper& stamps) const {
  for (const auto& l : bound_) {
    const double s = at.u[static_cast<std::size_t>(l.status)];
    const Complex self = s * (l.series + l.half_shunt);
    const Complex mutual = -s * l.series;
    stamp_product(stamps, l.from_vr, l.from_vi, l.from_vr, l.from_vi, self);
    stamp_product(stamps, l.from_vr, l.from_vi, l.to_vr, l.to_vi, mutual);
    stamp_product(stamps, l.to_vr, l.to_vi, l.to_vr, l.to_vi, self);
    stamp_product(stamps, l.to_vr, l.to_vi, l.from_vr, l.from_vi, mutual);
  }
  for (std::size_t k = 0; k < shunts_.size(); ++k) {
    const int r = shunt_rows_[k].first, i = shunt_rows_[k].second;
    stamp_product(stamps, r, i, r, i, shunts_[k].admittance);
  }
  for (std::size_t k = 0; k < loads_.size(); ++k) {
    const int r = load_rows_[k].first, i = load_rows_[k].second;
    const double vr = at[r], vi = at[i];
    const double P = loads_[k].power.real(), Q = loads_[k].power.imag();
    const double d = vr * vr + vi * vi;
    double drr = 0.0, dri = 0.0, dir = 0.0, dii = 0.0;
    if (d > 0.0) {
      const double a = P * vr + Q * vi;  // -Re(I) * d
      const double b = P * vi - Q * vr;  // -Im(I) * d
      const double d2 = d * d;
      drr = -(P * d - 2.0 * a * vr) / d2;
      dri = -(Q * d - 2.0 * a * vi) / d2;
      dir = -(-Q * d - 2.0 * b * vr) / d2;
      dii = -(P * d - 2.0 * b * vi) / d2;
    }
    stamps.add(r, r, drr);
    stamps.add(r, i, dri);
    stamps.add(i, r, dir);
    stamps.add(i, i, dii);
  }
}

void NetworkComponent::check_discrete(std::span<const double> u) const {
  check_connected_impl(buses_, lines_, [&](std::size_t k) {
    return u[static_cast<std::size_t>(status_index_[k])] != 0.0;
  });
}

}  // namespace mmdae::network
