#pragma once

// Mass-matrix DAE representation:
//
//   [ M_x 0 ] [ x' ]   [ f(x, y, u, t) ]
//   [ 0   0 ] [ 0  ] = [ g(x, y, u, t) ]
//
// M_x is a constant diagonal. Row i of the stacked residual is paired with
// variable i, so a zero mass entry turns a differential state into an
// algebraic one without changing the layout.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mmdae {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

enum class VariableKind { differential, algebraic };

struct VariableDecl {
  std::string name;
  VariableKind kind = VariableKind::algebraic;
  double mass = 1.0;  // ignored for algebraic variables
};

struct DiscreteDecl {
  std::string name;
  double initial = 0.0;
};

struct VariableInfo {
  std::string name;
  VariableKind kind;
  std::string owner;
};

class VariableLayout {
 public:
  VariableLayout() = default;

  std::size_t n() const { return n_; }
  std::size_t m() const { return vars_.size() - n_; }
  std::size_t size() const { return vars_.size(); }

  const VariableInfo& operator[](std::size_t i) const { return vars_[i]; }
  const std::vector<VariableInfo>& variables() const { return vars_; }
  std::vector<std::string> names() const;

  std::optional<int> find(std::string_view name) const;
  /// Throws ValidationError naming `requester` when the name is unknown.
  int at(std::string_view name, std::string_view requester = {}) const;

 private:
  friend class LayoutBuilder;
  std::size_t n_ = 0;
  std::vector<VariableInfo> vars_;
  std::unordered_map<std::string, int> index_;
};

/// Discrete state u: line statuses and other piecewise-constant flags.
class DiscreteLayout {
 public:
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<int> find(std::string_view name) const;
  int at(std::string_view name, std::string_view requester = {}) const;

 private:
  friend class LayoutBuilder;
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

struct MassDiagonal {
  std::vector<double> entries;
};

/// Count of strictly positive entries.
std::size_t mass_rank(const MassDiagonal& mass);

/// A point at which a component is evaluated. `z` is the stacked [x; y].
struct EvalPoint {
  std::span<const double> z;
  std::span<const double> u;
  double t = 0.0;

  double operator[](int i) const { return z[static_cast<std::size_t>(i)]; }
};

class JacobianStamper {
 public:
  explicit JacobianStamper(std::vector<Triplet>& out) : out_(out) {}
  void add(int row, int col, double value) { out_.emplace_back(row, col, value); }

 private:
  std::vector<Triplet>& out_;
};

/// An equation-set contributor. Components declare their variables, resolve
/// references once in bind(), then add into the stacked residual. Residual
/// contributions are summed, so several components may write the same row
/// (for example current injections into a bus balance).
///
/// jacobian() must emit the same (row, col) sequence on every call.
class Component {
 public:
  virtual ~Component() = default;

  virtual const std::string& id() const = 0;
  virtual std::vector<VariableDecl> variables() const = 0;
  virtual std::vector<DiscreteDecl> discrete() const { return {}; }
  virtual void bind(const VariableLayout& layout, const DiscreteLayout& discrete) = 0;
  virtual void residual(const EvalPoint& at, std::span<double> out) const = 0;
  virtual void jacobian(const EvalPoint& at, JacobianStamper& stamps) const = 0;
  /// Rejects discrete states this component cannot operate with.
  virtual void check_discrete(std::span<const double> /*u*/) const {}
  /// Diagnostics raised at assembly (non-fatal).
  virtual std::vector<std::string> warnings() const { return {}; }
};

struct Residuals {
  Eigen::VectorXd f;  // n differential rows (numerator form)
  Eigen::VectorXd g;  // m algebraic rows
};

struct JacobianBlocks {
  SparseMatrix fx, fy, gx, gy;
};

struct InitialCondition {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd u;
  double t = 0.0;

  Eigen::VectorXd stacked() const;
};

class DaeProblem {
 public:
  const VariableLayout& layout() const { return *layout_; }
  const DiscreteLayout& discrete_layout() const { return *discrete_; }
  const MassDiagonal& mass() const { return mass_; }
  /// Per-row factor applied to the differential residuals; 1 unless the
  /// problem was produced by to_traditional().
  const std::vector<double>& row_scale() const { return row_scale_; }
  const InitialCondition& initial() const { return initial_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const std::vector<std::shared_ptr<const Component>>& components() const { return components_; }

  std::size_t n() const { return layout_->n(); }
  std::size_t m() const { return layout_->m(); }
  std::size_t size() const { return layout_->size(); }

  /// Copy with a different initial condition; components are shared.
  DaeProblem with_initial(InitialCondition ic) const;

  /// Stacked residual [f; g] into `out` (length n + m).
  void residual(std::span<const double> z, std::span<const double> u, double t,
                std::span<double> out) const;
  Eigen::VectorXd residual(const Eigen::VectorXd& z, const Eigen::VectorXd& u, double t) const;
  Residuals eval_residuals(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& u, double t) const;

  /// Full (n + m) square Jacobian on the fixed assembly pattern. The pattern
  /// always contains the diagonal.
  SparseMatrix jacobian(const Eigen::VectorXd& z, const Eigen::VectorXd& u, double t) const;
  JacobianBlocks eval_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& u, double t) const;

  /// Assembly-time pattern (values are zero).
  const SparseMatrix& pattern() const { return *pattern_; }
  /// Index into valuePtr() of the diagonal entry of each column.
  const std::vector<int>& diagonal_slots() const { return *diagonal_slots_; }

  /// Validates a discrete state against every component.
  void check_discrete(const Eigen::VectorXd& u) const;

 private:
  friend DaeProblem assemble_problem(std::vector<std::shared_ptr<Component>> components);
  friend DaeProblem to_traditional(const DaeProblem& p);

  void stamp(const EvalPoint& at, std::vector<Triplet>& out) const;

  std::shared_ptr<const VariableLayout> layout_;
  std::shared_ptr<const DiscreteLayout> discrete_;
  MassDiagonal mass_;
  std::vector<double> row_scale_;
  std::vector<std::shared_ptr<const Component>> components_;
  std::shared_ptr<const SparseMatrix> pattern_;
  std::shared_ptr<const std::vector<int>> slot_of_stamp_;
  std::shared_ptr<const std::vector<int>> diagonal_slots_;
  InitialCondition initial_;
  std::vector<std::string> warnings_;
};

/// Stacks the components into one problem: differential rows first (by
/// component order), then algebraic rows. The initial condition is zero with
/// discrete states at their declared values.
DaeProblem assemble_problem(std::vector<std::shared_ptr<Component>> components);

/// Traditional twin: mass all ones, differential rows divided by mu_ii.
/// Throws ValidationError when any mass entry is zero.
DaeProblem to_traditional(const DaeProblem& p);

struct ConsistencyReport {
  double f_norm = 0.0;
  double g_norm = 0.0;
  std::string worst_f;  // empty when n == 0
  std::string worst_g;  // empty when m == 0
  bool pass = false;
};

ConsistencyReport check_consistency(const DaeProblem& p, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& y, const Eigen::VectorXd& u, double t,
                                    double tol);
ConsistencyReport check_consistency(const DaeProblem& p, double tol);

struct EventMarker {
  double time = 0.0;
  std::string id;
};

struct SolveStats {
  long steps_accepted = 0;
  long steps_rejected = 0;
  long newton_iterations = 0;
};

struct Trajectory {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> values;  // one row per accepted step
  std::vector<EventMarker> events;
  SolveStats stats;

  std::size_t size() const { return times.size(); }
  const Eigen::VectorXd& final_state() const { return values.back(); }
};

}  // namespace mmdae
