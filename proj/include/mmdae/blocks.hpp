#pragma once

// Transfer-function blocks in mass-matrix form.
//
//   lag:       T y'  = K u - y
//   lead-lag:  T2 x' = u - x
//              0     = T1 T2' (u - x) + x - y,   T2' = 1/T2 (0 when T2 = 0)
//
// A zero time constant leaves the row in place with a zero mass entry, which
// turns the lag into a pure gain and the lead-lag into a lag or pass-through.

#include "mmdae/dae.hpp"

#include <optional>
#include <string>

namespace mmdae::blocks {

struct LagBlock {
  double gain = 1.0;
  double time_constant = 0.0;
};

struct LeadLagBlock {
  double lead = 0.0;  // T1, numerator
  double lag = 0.0;   // T2, denominator
};

struct LagRow {
  double rhs = 0.0;  // K u - y
  double mass = 0.0;
  double d_input = 0.0;
  double d_output = -1.0;
};

struct LeadLagRows {
  double f = 0.0;  // u - x'
  double g = 0.0;  // T1 T2' (u - x') + x' - y
  double mass = 0.0;
  double df_du = 1.0;
  double df_dx = -1.0;
  double dg_du = 0.0;
  double dg_dx = 0.0;
  double dg_dy = -1.0;
};

double leadlag_aux(double lag);

LagRow lag_contribution(const LagBlock& b, double u, double y);
LeadLagRows leadlag_contribution(const LeadLagBlock& b, double u, double x, double y);

/// Lag output at steady state for input u0.
double lag_initialize(const LagBlock& b, double u0);

struct LeadLagInit {
  double x = 0.0;
  double y = 0.0;
};
LeadLagInit leadlag_initialize(const LeadLagBlock& b, double u0);

/// Non-empty when T2 = 0 with T1 > 0: the lead is silently dropped.
std::optional<std::string> leadlag_warning(const LeadLagBlock& b, const std::string& id);

/// Block input: a variable by name, or a constant when `variable` is empty.
struct Input {
  std::string variable;
  double constant = 0.0;

  static Input of(std::string name) { return {std::move(name), 0.0}; }
  static Input value(double v) { return {{}, v}; }
};

/// Standalone lag: differential "<id>.y" with mass T.
class LagComponent : public Component {
 public:
  LagComponent(std::string id, LagBlock block, Input input);

  const std::string& id() const override { return id_; }
  std::vector<VariableDecl> variables() const override;
  void bind(const VariableLayout& layout, const DiscreteLayout& discrete) override;
  void residual(const EvalPoint& at, std::span<double> out) const override;
  void jacobian(const EvalPoint& at, JacobianStamper& stamps) const override;

 private:
  std::string id_;
  LagBlock block_;
  Input input_;
  int y_ = -1;
  int u_ = -1;
};

/// Standalone lead-lag: differential "<id>.x" (mass T2), algebraic "<id>.y".
class LeadLagComponent : public Component {
 public:
  LeadLagComponent(std::string id, LeadLagBlock block, Input input);

  const std::string& id() const override { return id_; }
  std::vector<VariableDecl> variables() const override;
  void bind(const VariableLayout& layout, const DiscreteLayout& discrete) override;
  void residual(const EvalPoint& at, std::span<double> out) const override;
  void jacobian(const EvalPoint& at, JacobianStamper& stamps) const override;
  std::vector<std::string> warnings() const override;

 private:
  std::string id_;
  LeadLagBlock block_;
  Input input_;
  int x_ = -1;
  int y_ = -1;
  int u_ = -1;
};

/// Smooth prescribed signal, algebraic "<id>.u" = offset + amplitude sin(2 pi f t).
class SineSource : public Component {
 public:
  SineSource(std::string id, double offset, double amplitude, double frequency);

  const std::string& id() const override { return id_; }
  std::vector<VariableDecl> variables() const override;
  void bind(const VariableLayout& layout, const DiscreteLayout& discrete) override;
  void residual(const EvalPoint& at, std::span<double> out) const override;
  void jacobian(const EvalPoint& at, JacobianStamper& stamps) const override;

  double value(double t) const;

 private:
  std::string id_;
  double offset_;
  double amplitude_;
  double frequency_;
  int u_ = -1;
};

}  // namespace mmdae::blocks
