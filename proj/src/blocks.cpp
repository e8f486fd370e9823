#include "mmdae/blocks.hpp"

#include "mmdae/errors.hpp"

#include <cmath>
#include <numbers>

namespace mmdae::blocks {

namespace {

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw ValidationError(std::string(what) + " must be a finite nonnegative time constant");
}

double input_value(const EvalPoint& at, int index, const Input& in) {
  return index >= 0 ? at[index] : in.constant;
}

int bind_input(const VariableLayout& layout, const Input& in, const std::string& owner) {
  return in.variable.empty() ? -1 : layout.at(in.variable, owner);
}

}  // namespace

double leadlag_aux(double lag) {
  require_nonnegative(lag, "lead-lag T2");
  return lag != 0.0 ? 1.0 / lag : 0.0;
}

LagRow lag_contribution(const LagBlock& b, double u, double y) {
  require_nonnegative(b.time_constant, "lag T");
  LagRow r;
  r.rhs = b.gain * u - y;
  r.mass = b.time_constant;
  r.d_input = b.gain;
  r.d_output = -1.0;
  return r;
}

LeadLagRows leadlag_contribution(const LeadLagBlock& b, double u, double x, double y) {
  require_nonnegative(b.lead, "lead-lag T1");
  const double t2p = leadlag_aux(b.lag);
  const double k = b.lead * t2p;
  LeadLagRows r;
  r.f = u - x;
  r.g = k * (u - x) + x - y;
  r.mass = b.lag;
  r.dg_du = k;
  r.dg_dx = 1.0 - k;
  return r;
}

double lag_initialize(const LagBlock& b, double u0) { return b.gain * u0; }

LeadLagInit leadlag_initialize(const LeadLagBlock&, double u0) { return {u0, u0}; }

std::optional<std::string> leadlag_warning(const LeadLagBlock& b, const std::string& id) {
  if (b.lag == 0.0 && b.lead > 0.0) {
    return "lead-lag '" + id + "': T2 = 0 with T1 > 0 reduces to a pass-through; T1 is ignored";
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

LagComponent::LagComponent(std::string id, LagBlock block, Input input)
    : id_(std::move(id)), block_(block), input_(std::move(input)) {
  require_nonnegative(block_.time_constant, "lag T");
}

std::vector<VariableDecl> LagComponent::variables() const {
  return {{id_ + ".y", VariableKind::differential, block_.time_constant}};
}

void LagComponent::bind(const VariableLayout& layout, const DiscreteLayout&) {
  y_ = layout.at(id_ + ".y");
  u_ = bind_input(layout, input_, id_);
}

void LagComponent::residual(const EvalPoint& at, std::span<double> out) const {
  const LagRow r = lag_contribution(block_, input_value(at, u_, input_), at[y_]);
  out[static_cast<std::size_t>(y_)] += r.rhs;
}

void LagComponent::jacobian(const EvalPoint&, JacobianStamper& stamps) const {
  stamps.add(y_, y_, -1.0);
  if (u_ >= 0) stamps.add(y_, u_, block_.gain);
}

LeadLagComponent::LeadLagComponent(std::string id, LeadLagBlock block, Input input)
    : id_(std::move(id)), block_(block), input_(std::move(input)) {
  require_nonnegative(block_.lead, "lead-lag T1");
  require_nonnegative(block_.lag, "lead-lag T2");
}

std::vector<VariableDecl> LeadLagComponent::variables() const {
  return {{id_ + ".x", VariableKind::differential, block_.lag},
          {id_ + ".y", VariableKind::algebraic, 0.0}};
}

void LeadLagComponent::bind(const VariableLayout& layout, const DiscreteLayout&) {
  x_ = layout.at(id_ + ".x");
  y_ = layout.at(id_ + ".y");
  u_ = bind_input(layout, input_, id_);
}

void LeadLagComponent::residual(const EvalPoint& at, std::span<double> out) const {
  const LeadLagRows r = leadlag_contribution(block_, input_value(at, u_, input_), at[x_], at[y_]);
  out[static_cast<std::size_t>(x_)] += r.f;
  out[static_cast<std::size_t>(y_)] += r.g;
}

void LeadLagComponent::jacobian(const EvalPoint& at, JacobianStamper& stamps) const {
  const LeadLagRows r = leadlag_contribution(block_, 0.0, at[x_], at[y_]);
  stamps.add(x_, x_, r.df_dx);
  stamps.add(y_, x_, r.dg_dx);
  stamps.add(y_, y_, r.dg_dy);
  if (u_ >= 0) {
    stamps.add(x_, u_, r.df_du);
    stamps.add(y_, u_, r.dg_du);
  }
}

std::vector<std::string> LeadLagComponent::warnings() const {
  if (auto w = leadlag_warning(block_, id_)) return {*w};
  return {};
}

SineSource::SineSource(std::string id, double offset, double amplitude, double frequency)
    : id_(std::move(id)), offset_(offset), amplitude_(amplitude), frequency_(frequency) {}

std::vector<VariableDecl> SineSource::variables() const {
  return {{id_ + ".u", VariableKind::algebraic, 0.0}};
}

void SineSource::bind(const VariableLayout& layout, const DiscreteLayout&) {
  u_ = layout.at(id_ + ".u");
}

double SineSource::value(double t) const {
  return offset_ + amplitude_ * std::sin(2.0 * std::numbers::pi * frequency_ * t);
}

void SineSource::residual(const EvalPoint& at, std::span<double> out) const {
  out[static_cast<std::size_t>(u_)] += value(at.t) - at[u_];
}

void SineSource::jacobian(const EvalPoint&, JacobianStamper& stamps) const {
  stamps.add(u_, u_, -1.0);
}

}  // namespace mmdae::blocks
