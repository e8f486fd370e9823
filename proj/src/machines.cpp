#include "mmdae/machines.hpp"

#include "mmdae/errors.hpp"
#include "mmdae/network.hpp"

#include <cmath>

namespace mmdae::machines {

namespace {

enum Slot { kDelta, kOmega, kE1q, kE1d, kE2d, kE2q, kId, kIq, kPsi2d, kPsi2q, kXadIfd, kXaqI1q };

constexpr const char* kSlotNames[12] = {"delta", "omega", "e1q",   "e1d",   "e2d",    "e2q",
                                        "Id",    "Iq",    "psi2d", "psi2q", "XadIfd", "XaqI1q"};

struct Coupling {
  double gd1, gq1, gd2, gq2;
};

Coupling coupling(const GenrouParams& p) {
  return {(p.xpp - p.xl) / (p.xd1 - p.xl), (p.xpp - p.xl) / (p.xq1 - p.xl),
          (p.xd1 - p.xpp) / ((p.xd1 - p.xl) * (p.xd1 - p.xl)),
          (p.xq1 - p.xpp) / ((p.xq1 - p.xl) * (p.xq1 - p.xl))};
}

void fail(const GenrouParams& p, const std::string& what) {
  throw ValidationError("generator '" + p.id + "': " + what);
}

}  // namespace

void GenrouParams::validate() const {
  const double all[] = {xd, xq, xd1, xq1, xpp, xl, ra, td10, tq10, td20, tq20, h, d, omega_base};
  for (double v : all) {
    if (!std::isfinite(v)) fail(*this, "non-finite parameter");
  }
  if (!(xl >= 0.0)) fail(*this, "leakage reactance xl must be nonnegative");
  if (!(xd > xd1 && xd1 > xpp && xpp > xl))
    fail(*this, "reactances must satisfy xd > x'd > x'' > xl");
  if (!(xq > xq1 && xq1 > xpp)) fail(*this, "reactances must satisfy xq > x'q > x''");
  if (ra < 0.0) fail(*this, "ra must be nonnegative");
  if (td10 < 0.0 || tq10 < 0.0 || td20 < 0.0 || tq20 < 0.0)
    fail(*this, "time constants must be nonnegative");
  if ((td20 == 0.0) != (tq20 == 0.0))
    fail(*this, "sub-transient time constants must be reduced pairwise (T''d0 = T''q0 = 0)");
  if (!(h > 0.0)) fail(*this, "inertia H must be positive");
  if (d < 0.0) fail(*this, "damping D must be nonnegative");
  if (!(omega_base > 0.0)) fail(*this, "base angular frequency must be positive");
}

double electrical_torque(const GenrouState& s) { return s.psi2d * s.iq + s.psi2q * s.id; }

GenrouInit genrou_initialize(const GenrouParams& p, std::complex<double> voltage,
                             std::complex<double> power) {
  p.validate();
  using C = std::complex<double>;
  if (std::abs(voltage) == 0.0) fail(p, "zero terminal voltage at initialization");
  const C current = std::conj(power / voltage);
  const C emf = voltage + C(p.ra, p.xq) * current;
  if (std::abs(emf) == 0.0) fail(p, "non-physical operating point (|E| = 0)");
  const double delta = std::arg(emf);
  const C rot = std::polar(1.0, -delta);
  const C vdq = voltage * rot;  // vq - j vd
  const C idq = current * rot;  // iq - j id

  const Coupling c = coupling(p);
  GenrouInit init;
  GenrouState& s = init.state;
  s.delta = delta;
  s.omega = 1.0;
  const double vq = vdq.real();
  s.id = -idq.imag();
  s.iq = idq.real();
  s.e1q = vq + p.ra * s.iq + p.xd1 * s.id;
  s.e1d = (p.xq - p.xq1) * s.iq;
  s.e2d = s.e1q - (p.xd1 - p.xl) * s.id;
  s.e2q = s.e1d + (p.xq1 - p.xl) * s.iq;
  s.psi2d = c.gd1 * s.e1q + (1.0 - c.gd1) * s.e2d;
  s.psi2q = c.gq1 * s.e1d + (1.0 - c.gq1) * s.e2q;
  s.xadifd = s.e1q + (p.xd - p.xd1) * (s.id + c.gd2 * (s.e1q - s.e2d - (p.xd1 - p.xl) * s.id));
  s.xaqi1q = s.e1d - (p.xq - p.xq1) * (s.iq - c.gq2 * (s.e1d - s.e2q + (p.xq1 - p.xl) * s.iq));
  init.vf0 = s.xadifd;
  init.tm0 = electrical_torque(s);
  return init;
}

GenrouResidual genrou_residual(const GenrouParams& p, const GenrouState& s,
                               std::complex<double> voltage, double vf, double tm) {
  const Coupling c = coupling(p);
  const double sn = std::sin(s.delta), cs = std::cos(s.delta);
  const double vr = voltage.real(), vi = voltage.imag();
  const double vd = vr * sn - vi * cs;
  const double vq = vr * cs + vi * sn;
  GenrouResidual r;
  r.delta = p.omega_base * (s.omega - 1.0);
  r.omega = tm - electrical_torque(s) - p.d * (s.omega - 1.0);
  r.e1q = -s.xadifd + vf;
  r.e1d = -s.xaqi1q;
  r.e2d = -s.id * (p.xd1 - p.xl) - s.e2d + s.e1q;
  r.e2q = s.iq * (p.xq1 - p.xl) - s.e2q + s.e1d;
  r.stator_d = vd + p.ra * s.id - p.xpp * s.iq - s.psi2q;
  r.stator_q = vq + p.ra * s.iq + p.xpp * s.id - s.psi2d;
  r.psi2d = c.gd1 * s.e1q + (1.0 - c.gd1) * s.e2d - s.psi2d;
  r.psi2q = c.gq1 * s.e1d + (1.0 - c.gq1) * s.e2q - s.psi2q;
  r.xadifd = s.e1q + (p.xd - p.xd1) * (s.id + c.gd2 * (s.e1q - s.e2d - (p.xd1 - p.xl) * s.id)) -
             s.xadifd;
  r.xaqi1q = s.e1d - (p.xq - p.xq1) * (s.iq - c.gq2 * (s.e1d - s.e2q + (p.xq1 - p.xl) * s.iq)) -
             s.xaqi1q;
  r.injection = {s.id * sn + s.iq * cs, -s.id * cs + s.iq * sn};
  return r;
}

// ---------------------------------------------------------------------------

GenrouComponent::GenrouComponent(GenrouParams params, blocks::Input vf, blocks::Input tm)
    : params_(std::move(params)), vf_in_(std::move(vf)), tm_in_(std::move(tm)) {
  params_.validate();
}

std::vector<std::string> GenrouComponent::state_names(const std::string& id) {
  std::vector<std::string> out;
  for (const char* s : kSlotNames) out.push_back(id + "." + s);
  return out;
}

std::vector<VariableDecl> GenrouComponent::variables() const {
  const auto names = state_names(params_.id);
  const double mass[6] = {1.0, 2.0 * params_.h, params_.td10, params_.tq10, params_.td20,
                          params_.tq20};
  std::vector<VariableDecl> vars;
  for (int i = 0; i < 6; ++i) vars.push_back({names[static_cast<std::size_t>(i)], VariableKind::differential, mass[i]});
  for (int i = 6; i < 12; ++i) vars.push_back({names[static_cast<std::size_t>(i)], VariableKind::algebraic, 0.0});
  return vars;
}

void GenrouComponent::bind(const VariableLayout& layout, const DiscreteLayout&) {
  const auto names = state_names(params_.id);
  for (int i = 0; i < 12; ++i) v_[i] = layout.at(names[static_cast<std::size_t>(i)], params_.id);
  vr_ = layout.at(network::vr_name(params_.bus), params_.id);
  vi_ = layout.at(network::vi_name(params_.bus), params_.id);
  vf_ = vf_in_.variable.empty() ? -1 : layout.at(vf_in_.variable, params_.id);
  tm_ = tm_in_.variable.empty() ? -1 : layout.at(tm_in_.variable, params_.id);
}

GenrouState GenrouComponent::read(const EvalPoint& at) const {
  GenrouState s;
  s.delta = at[v_[kDelta]];
  s.omega = at[v_[kOmega]];
  s.e1q = at[v_[kE1q]];
  s.e1d = at[v_[kE1d]];
  s.e2d = at[v_[kE2d]];
  s.e2q = at[v_[kE2q]];
  s.id = at[v_[kId]];
  s.iq = at[v_[kIq]];
  s.psi2d = at[v_[kPsi2d]];
  s.psi2q = at[v_[kPsi2q]];
  s.xadifd = at[v_[kXadIfd]];
  s.xaqi1q = at[v_[kXaqI1q]];
  return s;
}

void GenrouComponent::residual(const EvalPoint& at, std::span<double> out) const {
  const double vf = vf_ >= 0 ? at[vf_] : vf_in_.constant;
  const double tm = tm_ >= 0 ? at[tm_] : tm_in_.constant;
  const GenrouResidual r = genrou_residual(params_, read(at), {at[vr_], at[vi_]}, vf, tm);
  const double rows[12] = {r.delta,    r.omega,    r.e1q,   r.e1d,   r.e2d,    r.e2q,
                           r.stator_d, r.stator_q, r.psi2d, r.psi2q, r.xadifd, r.xaqi1q};
  for (int i = 0; i < 12; ++i) out[static_cast<std::size_t>(v_[i])] += rows[i];
  out[static_cast<std::size_t>(vr_)] += r.injection.real();
  out[static_cast<std::size_t>(vi_)] += r.injection.imag();
}

void GenrouComponent::jacobian(const EvalPoint& at, JacobianStamper& st) const {
  const GenrouParams& p = params_;
  const Coupling c = coupling(p);
  const GenrouState s = read(at);
  const double sn = std::sin(s.delta), cs = std::cos(s.delta);
  const double vr = at[vr_], vi = at[vi_];
  auto add = [&](int row, int col, double v) { st.add(v_[row], v_[col], v); };

  add(kDelta, kOmega, p.omega_base);

  add(kOmega, kOmega, -p.d);
  add(kOmega, kPsi2d, -s.iq);
  add(kOmega, kIq, -s.psi2d);
  add(kOmega, kPsi2q, -s.id);
  add(kOmega, kId, -s.psi2q);
  if (tm_ >= 0) st.add(v_[kOmega], tm_, 1.0);

  add(kE1q, kXadIfd, -1.0);
  if (vf_ >= 0) st.add(v_[kE1q], vf_, 1.0);

  add(kE1d, kXaqI1q, -1.0);

  add(kE2d, kId, -(p.xd1 - p.xl));
  add(kE2d, kE2d, -1.0);
  add(kE2d, kE1q, 1.0);

  add(kE2q, kIq, p.xq1 - p.xl);
  add(kE2q, kE2q, -1.0);
  add(kE2q, kE1d, 1.0);

  // stator d: vd = vr sin d - vi cos d
  add(kId, kDelta, vr * cs + vi * sn);
  st.add(v_[kId], vr_, sn);
  st.add(v_[kId], vi_, -cs);
  add(kId, kId, p.ra);
  add(kId, kIq, -p.xpp);
  add(kId, kPsi2q, -1.0);

  // stator q: vq = vr cos d + vi sin d
  add(kIq, kDelta, -vr * sn + vi * cs);
  st.add(v_[kIq], vr_, cs);
  st.add(v_[kIq], vi_, sn);
  add(kIq, kIq, p.ra);
  add(kIq, kId, p.xpp);
  add(kIq, kPsi2d, -1.0);

  add(kPsi2d, kE1q, c.gd1);
  add(kPsi2d, kE2d, 1.0 - c.gd1);
  add(kPsi2d, kPsi2d, -1.0);

  add(kPsi2q, kE1d, c.gq1);
  add(kPsi2q, kE2q, 1.0 - c.gq1);
  add(kPsi2q, kPsi2q, -1.0);

  const double kd = p.xd - p.xd1, kq = p.xq - p.xq1;
  add(kXadIfd, kE1q, 1.0 + kd * c.gd2);
  add(kXadIfd, kE2d, -kd * c.gd2);
  add(kXadIfd, kId, kd * (1.0 - c.gd2 * (p.xd1 - p.xl)));
  add(kXadIfd, kXadIfd, -1.0);

  add(kXaqI1q, kE1d, 1.0 + kq * c.gq2);
  add(kXaqI1q, kE2q, -kq * c.gq2);
  add(kXaqI1q, kIq, -kq * (1.0 - c.gq2 * (p.xq1 - p.xl)));
  add(kXaqI1q, kXaqI1q, -1.0);

  // injection: Ir = id sin d + iq cos d, Ii = -id cos d + iq sin d
  st.add(vr_, v_[kDelta], s.id * cs - s.iq * sn);
  st.add(vr_, v_[kId], sn);
  st.add(vr_, v_[kIq], cs);
  st.add(vi_, v_[kDelta], s.id * sn + s.iq * cs);
  st.add(vi_, v_[kId], -cs);
  st.add(vi_, v_[kIq], sn);
}

// ---------------------------------------------------------------------------

ExciterComponent::ExciterComponent(ExciterParams params, int bus)
    : params_(std::move(params)), bus_(bus) {
  if (!(params_.ta >= 0.0) || !std::isfinite(params_.ta))
    throw ValidationError("exciter '" + params_.id + "': T_A must be nonnegative");
  if (!(params_.ka > 0.0) || !std::isfinite(params_.ka))
    throw ValidationError("exciter '" + params_.id + "': K_A must be positive");
}

std::vector<VariableDecl> ExciterComponent::variables() const {
  return {{output(), VariableKind::differential, params_.ta}};
}

void ExciterComponent::bind(const VariableLayout& layout, const DiscreteLayout&) {
  if (!layout.find(params_.generator + ".delta"))
    throw ValidationError("exciter '" + params_.id + "' links to unknown generator '" +
                          params_.generator + "'");
  vf_ = layout.at(output(), params_.id);
  vr_ = layout.at(network::vr_name(bus_), params_.id);
  vi_ = layout.at(network::vi_name(bus_), params_.id);
}

void ExciterComponent::residual(const EvalPoint& at, std::span<double> out) const {
  const double vmag = std::hypot(at[vr_], at[vi_]);
  const blocks::LagRow r =
      blocks::lag_contribution({params_.ka, params_.ta}, params_.vref - vmag, at[vf_]);
  out[static_cast<std::size_t>(vf_)] += r.rhs;
}

void ExciterComponent::jacobian(const EvalPoint& at, JacobianStamper& st) const {
  const double vr = at[vr_], vi = at[vi_];
  const double vmag = std::hypot(vr, vi);
  const blocks::LagRow r = blocks::lag_contribution({params_.ka, params_.ta}, 0.0, at[vf_]);
  st.add(vf_, vf_, r.d_output);
  st.add(vf_, vr_, vmag > 0.0 ? -r.d_input * vr / vmag : 0.0);
  st.add(vf_, vi_, vmag > 0.0 ? -r.d_input * vi / vmag : 0.0);
}

double exciter_vref(const ExciterParams& p, double vmag, double vf0) { return vmag + vf0 / p.ka; }

// ---------------------------------------------------------------------------

GovernorComponent::GovernorComponent(GovernorParams params) : params_(std::move(params)) {
  const auto& g = params_;
  if (!(g.r > 0.0) || !std::isfinite(g.r))
    throw ValidationError("governor '" + g.id + "': droop R must be positive");
  for (double t : {g.t1, g.t2, g.t3}) {
    if (!(t >= 0.0) || !std::isfinite(t))
      throw ValidationError("governor '" + g.id + "': time constants must be nonnegative");
  }
}

std::vector<VariableDecl> GovernorComponent::variables() const {
  return {{params_.id + ".xg", VariableKind::differential, params_.t1},
          {params_.id + ".xl", VariableKind::differential, params_.t3},
          {output(), VariableKind::algebraic, 0.0}};
}

void GovernorComponent::bind(const VariableLayout& layout, const DiscreteLayout&) {
  if (!layout.find(params_.generator + ".omega"))
    throw ValidationError("governor '" + params_.id + "' links to unknown generator '" +
                          params_.generator + "'");
  xg_ = layout.at(params_.id + ".xg");
  xl_ = layout.at(params_.id + ".xl");
  tm_ = layout.at(output());
  omega_ = layout.at(params_.generator + ".omega");
}

void GovernorComponent::residual(const EvalPoint& at, std::span<double> out) const {
  const double input = params_.tref + (1.0 - at[omega_]) / params_.r;
  const blocks::LagRow lag = blocks::lag_contribution({1.0, params_.t1}, input, at[xg_]);
  const blocks::LeadLagRows ll =
      blocks::leadlag_contribution({params_.t2, params_.t3}, at[xg_], at[xl_], at[tm_]);
  out[static_cast<std::size_t>(xg_)] += lag.rhs;
  out[static_cast<std::size_t>(xl_)] += ll.f;
  out[static_cast<std::size_t>(tm_)] += ll.g;
}

void GovernorComponent::jacobian(const EvalPoint& at, JacobianStamper& st) const {
  const blocks::LagRow lag = blocks::lag_contribution({1.0, params_.t1}, 0.0, at[xg_]);
  const blocks::LeadLagRows ll =
      blocks::leadlag_contribution({params_.t2, params_.t3}, at[xg_], at[xl_], at[tm_]);
  st.add(xg_, xg_, lag.d_output);
  st.add(xg_, omega_, -lag.d_input / params_.r);
  st.add(xl_, xg_, ll.df_du);
  st.add(xl_, xl_, ll.df_dx);
  st.add(tm_, xg_, ll.dg_du);
  st.add(tm_, xl_, ll.dg_dx);
  st.add(tm_, tm_, ll.dg_dy);
}

std::vector<std::string> GovernorComponent::warnings() const {
  if (auto w = blocks::leadlag_warning({params_.t2, params_.t3}, params_.id)) return {*w};
  return {};
}

}  // namespace mmdae::machines
