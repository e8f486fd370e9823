#pragma once

// Round-rotor synchronous generator in mass-matrix form.
//
// Differential rows (mass entries 1, 2H, T'd0, T'q0, T''d0, T''q0):
//
//   delta' = Wb (w - 1)
//   2H w'  = Tm - Te - D (w - 1)
//   T'd0  e'q'  = -XadIfd + vf
//   T'q0  e'd'  = -XaqI1q
//   T''d0 e''d' = -Id (x'd - xl) - e''d + e'q
//   T''q0 e''q' =  Iq (x'q - xl) - e''q + e'd
//
// e''d and e''q are the damper-flux states (psi1d and -psi2q in the usual
// two-axis-with-dampers notation). Algebraic closure, with
// gd1 = (x'' - xl)/(x'd - xl), gd2 = (x'd - x'')/(x'd - xl)^2 and the q mirror:
//
//   psi''d = gd1 e'q + (1 - gd1) e''d
//   psi''q = gq1 e'd + (1 - gq1) e''q
//   XadIfd = e'q + (xd - x'd) [Id + gd2 (e'q - e''d - (x'd - xl) Id)]
//   XaqI1q = e'd - (xq - x'q) [Iq - gq2 (e'd - e''q + (x'q - xl) Iq)]
//   0 = vd + ra Id - x'' Iq - psi''q
//   0 = vq + ra Iq + x'' Id - psi''d
//   Te = psi''d Iq + psi''q Id
//
// Rotor/network frame: vd = Vr sin d - Vi cos d, vq = Vr cos d + Vi sin d.
// Setting T''d0 = T''q0 = 0 yields the one d- and one q-axis flux-decay model.

#include "mmdae/blocks.hpp"
#include "mmdae/dae.hpp"

#include <complex>
#include <numbers>
#include <string>

namespace mmdae::machines {

struct GenrouParams {
  std::string id;
  int bus = 0;
  double xd = 1.8, xq = 1.7;
  double xd1 = 0.3, xq1 = 0.55;  // x'd, x'q
  double xpp = 0.25;             // x'' (common sub-transient reactance)
  double xl = 0.2;
  double ra = 0.0;
  double td10 = 8.0, tq10 = 0.4;    // T'd0, T'q0
  double td20 = 0.03, tq20 = 0.05;  // T''d0, T''q0
  double h = 6.5;
  double d = 0.0;
  double omega_base = 2.0 * std::numbers::pi * 60.0;

  void validate() const;
  bool reduced() const { return td20 == 0.0 && tq20 == 0.0; }
};

struct GenrouState {
  double delta = 0.0, omega = 1.0;
  double e1q = 0.0, e1d = 0.0, e2d = 0.0, e2q = 0.0;
  double id = 0.0, iq = 0.0;
  double psi2d = 0.0, psi2q = 0.0;
  double xadifd = 0.0, xaqi1q = 0.0;
};

struct GenrouInit {
  GenrouState state;
  double vf0 = 0.0;
  double tm0 = 0.0;
};

/// Back-solves every state from the terminal voltage phasor and the power
/// injected into the network (system per-unit).
GenrouInit genrou_initialize(const GenrouParams& p, std::complex<double> voltage,
                             std::complex<double> power);

/// Electrical torque for a given state.
double electrical_torque(const GenrouState& s);

struct GenrouResidual {
  double delta, omega, e1q, e1d, e2d, e2q;
  double stator_d, stator_q, psi2d, psi2q, xadifd, xaqi1q;
  std::complex<double> injection;
};

/// Pointwise residual of every generator row, for terminal voltage V and
/// inputs vf, tm.
GenrouResidual genrou_residual(const GenrouParams& p, const GenrouState& s,
                               std::complex<double> voltage, double vf, double tm);

class GenrouComponent : public Component {
 public:
  /// vf/tm: linked controller output variables, or constants.
  GenrouComponent(GenrouParams params, blocks::Input vf, blocks::Input tm);

  const std::string& id() const override { return params_.id; }
  const GenrouParams& params() const { return params_; }
  std::vector<VariableDecl> variables() const override;
  void bind(const VariableLayout& layout, const DiscreteLayout& discrete) override;
  void residual(const EvalPoint& at, std::span<double> out) const override;
  void jacobian(const EvalPoint& at, JacobianStamper& stamps) const override;

  static std::vector<std::string> state_names(const std::string& id);

 private:
  GenrouState read(const EvalPoint& at) const;

  GenrouParams params_;
  blocks::Input vf_in_, tm_in_;
  // delta omega e1q e1d e2d e2q | id iq psi2d psi2q xadifd xaqi1q
  int v_[12] = {};
  int vr_ = -1, vi_ = -1;
  int vf_ = -1, tm_ = -1;
};

struct ExciterParams {
  std::string id;
  std::string generator;
  double ka = 50.0;
  double ta = 0.05;
  double vref = 1.0;  // back-solved at initialization
};

/// T_A vf' = K_A (vref - |V|) - vf, a lag block on the voltage error.
class ExciterComponent : public Component {
 public:
  ExciterComponent(ExciterParams params, int bus);

  const std::string& id() const override { return params_.id; }
  std::vector<VariableDecl> variables() const override;
  void bind(const VariableLayout& layout, const DiscreteLayout& discrete) override;
  void residual(const EvalPoint& at, std::span<double> out) const override;
  void jacobian(const EvalPoint& at, JacobianStamper& stamps) const override;

  std::string output() const { return params_.id + ".vf"; }

 private:
  ExciterParams params_;
  int bus_;
  int vf_ = -1, vr_ = -1, vi_ = -1;
};

/// Back-solved reference keeping the exciter at rest with output vf0.
double exciter_vref(const ExciterParams& p, double vmag, double vf0);

struct GovernorParams {
  std::string id;
  std::string generator;
  double r = 0.05;   // droop, system base
  double t1 = 0.5;   // lag
  double t2 = 1.0;   // lead-lag numerator
  double t3 = 2.0;   // lead-lag denominator
  double tref = 0.0;  // back-solved at initialization
};

/// Droop into a lag (T1) into a lead-lag (T2/T3) producing Tm:
///   T1 xg' = tref + (1 - w)/R - xg
///   T3 xl' = xg - xl
///   0      = T2 T3' (xg - xl) + xl - tm
class GovernorComponent : public Component {
 public:
  explicit GovernorComponent(GovernorParams params);

  const std::string& id() const override { return params_.id; }
  std::vector<VariableDecl> variables() const override;
  void bind(const VariableLayout& layout, const DiscreteLayout& discrete) override;
  void residual(const EvalPoint& at, std::span<double> out) const override;
  void jacobian(const EvalPoint& at, JacobianStamper& stamps) const override;
  std::vector<std::string> warnings() const override;

  std::string output() const { return params_.id + ".tm"; }

 private:
  GovernorParams params_;
  int xg_ = -1, xl_ = -1, tm_ = -1, omega_ = -1;
};

}  // namespace mmdae::machines
