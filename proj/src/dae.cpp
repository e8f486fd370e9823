#include "mmdae/dae.hpp"

#include "mmdae/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mmdae {

std::vector<std::string> VariableLayout::names() const {
  std::vector<std::string> out;
  out.reserve(vars_.size());
  for (const auto& v : vars_) out.push_back(v.name);
  return out;
}

std::optional<int> VariableLayout::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int VariableLayout::at(std::string_view name, std::string_view requester) const {
  if (auto i = find(name)) return *i;
  std::string msg = "dangling reference to variable '" + std::string(name) + "'";
  if (!requester.empty()) msg += " from '" + std::string(requester) + "'";
  throw ValidationError(msg);
}

std::optional<int> DiscreteLayout::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int DiscreteLayout::at(std::string_view name, std::string_view requester) const {
  if (auto i = find(name)) return *i;
  std::string msg = "dangling reference to discrete state '" + std::string(name) + "'";
  if (!requester.empty()) msg += " from '" + std::string(requester) + "'";
  throw ValidationError(msg);
}

class LayoutBuilder {
 public:
  static std::pair<VariableLayout, DiscreteLayout> build(
      const std::vector<std::shared_ptr<Component>>& components, std::vector<double>& mass,
      std::vector<double>& u0) {
    VariableLayout layout;
    std::vector<VariableInfo> algebraic;
    for (const auto& c : components) {
      for (auto& d : c->variables()) {
        if (d.kind == VariableKind::differential) {
          if (!(d.mass >= 0.0) || !std::isfinite(d.mass))
            throw ValidationError("negative or non-finite mass entry for '" + d.name + "'");
          layout.vars_.push_back({d.name, d.kind, c->id()});
          mass.push_back(d.mass);
        } else {
          algebraic.push_back({d.name, d.kind, c->id()});
        }
      }
    }
    layout.n_ = layout.vars_.size();
    for (auto& a : algebraic) layout.vars_.push_back(std::move(a));
    for (std::size_t i = 0; i < layout.vars_.size(); ++i) {
      if (!layout.index_.emplace(layout.vars_[i].name, static_cast<int>(i)).second)
        throw ValidationError("duplicate variable name '" + layout.vars_[i].name + "'");
    }

    DiscreteLayout discrete;
    for (const auto& c : components) {
      for (auto& d : c->discrete()) {
        if (!discrete.index_.emplace(d.name, static_cast<int>(discrete.names_.size())).second)
          throw ValidationError("duplicate discrete state '" + d.name + "'");
        discrete.names_.push_back(d.name);
        u0.push_back(d.initial);
      }
    }
    return {std::move(layout), std::move(discrete)};
  }
};

std::size_t mass_rank(const MassDiagonal& mass) {
  return static_cast<std::size_t>(
      std::count_if(mass.entries.begin(), mass.entries.end(), [](double v) { return v > 0.0; }));
}

Eigen::VectorXd InitialCondition::stacked() const {
  Eigen::VectorXd z(x.size() + y.size());
  z << x, y;
  return z;
}

DaeProblem assemble_problem(std::vector<std::shared_ptr<Component>> components) {
  if (components.empty()) throw ValidationError("cannot assemble a problem with no equations");

  DaeProblem p;
  std::vector<double> u0;
  auto [layout, discrete] = LayoutBuilder::build(components, p.mass_.entries, u0);
  if (layout.size() == 0) throw ValidationError("cannot assemble a problem with no equations");

  for (auto& c : components) c->bind(layout, discrete);

  p.layout_ = std::make_shared<const VariableLayout>(std::move(layout));
  p.discrete_ = std::make_shared<const DiscreteLayout>(std::move(discrete));
  p.row_scale_.assign(p.layout_->n(), 1.0);
  for (auto& c : components) {
    for (auto& w : c->warnings()) p.warnings_.push_back(w);
    p.components_.push_back(std::move(c));
  }

  const auto size = static_cast<Eigen::Index>(p.layout_->size());
  p.initial_.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.layout_->n()));
  p.initial_.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.layout_->m()));
  p.initial_.u = Eigen::Map<const Eigen::VectorXd>(u0.data(), static_cast<Eigen::Index>(u0.size()));

  // Pattern from a stamp at the zero point; stamp sequence is value independent.
  std::vector<Triplet> stamps;
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(size);
  p.stamp({{z0.data(), static_cast<std::size_t>(size)},
           {p.initial_.u.data(), static_cast<std::size_t>(p.initial_.u.size())},
           0.0},
          stamps);
  for (const auto& s : stamps) {
    if (s.row() < 0 || s.row() >= size || s.col() < 0 || s.col() >= size)
      throw ValidationError("Jacobian stamp outside the problem dimensions");
  }

  std::vector<Triplet> structural;
  structural.reserve(stamps.size() + static_cast<std::size_t>(size));
  for (const auto& s : stamps) structural.emplace_back(s.row(), s.col(), 1.0);
  for (int i = 0; i < size; ++i) structural.emplace_back(i, i, 1.0);
  SparseMatrix pattern(size, size);
  pattern.setFromTriplets(structural.begin(), structural.end());
  pattern.makeCompressed();

  auto slot = [&pattern](int row, int col) {
    const int* begin = pattern.innerIndexPtr() + pattern.outerIndexPtr()[col];
    const int* end = pattern.innerIndexPtr() + pattern.outerIndexPtr()[col + 1];
    const int* it = std::lower_bound(begin, end, row);
    return static_cast<int>(it - pattern.innerIndexPtr());
  };
  std::vector<int> slots;
  slots.reserve(stamps.size());
  for (const auto& s : stamps) slots.push_back(slot(s.row(), s.col()));
  std::vector<int> diag;
  diag.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) diag.push_back(slot(i, i));

  std::fill(pattern.valuePtr(), pattern.valuePtr() + pattern.nonZeros(), 0.0);
  p.pattern_ = std::make_shared<const SparseMatrix>(std::move(pattern));
  p.slot_of_stamp_ = std::make_shared<const std::vector<int>>(std::move(slots));
  p.diagonal_slots_ = std::make_shared<const std::vector<int>>(std::move(diag));
  return p;
}

DaeProblem DaeProblem::with_initial(InitialCondition ic) const {
  if (static_cast<std::size_t>(ic.x.size()) != n() || static_cast<std::size_t>(ic.y.size()) != m() ||
      static_cast<std::size_t>(ic.u.size()) != discrete_->size())
    throw ValidationError("initial condition does not match the problem layout");
  DaeProblem copy = *this;
  copy.initial_ = std::move(ic);
  return copy;
}

void DaeProblem::stamp(const EvalPoint& at, std::vector<Triplet>& out) const {
  JacobianStamper stamper(out);
  for (const auto& c : components_) c->jacobian(at, stamper);
}

void DaeProblem::residual(std::span<const double> z, std::span<const double> u, double t,
                          std::span<double> out) const {
  if (z.size() != size() || out.size() != size() || u.size() != discrete_->size())
    throw ValidationError("residual evaluation: vector length does not match the layout");
  std::fill(out.begin(), out.end(), 0.0);
  const EvalPoint at{z, u, t};
  for (const auto& c : components_) c->residual(at, out);
  const std::size_t nd = n();
  for (std::size_t i = 0; i < nd; ++i) out[i] *= row_scale_[i];
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) {
      const auto& name = (*layout_)[i].name;
      throw EvaluationError(name, "non-finite residual in equation '" + name + "'");
    }
  }
}

Eigen::VectorXd DaeProblem::residual(const Eigen::VectorXd& z, const Eigen::VectorXd& u,
                                     double t) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  residual({z.data(), static_cast<std::size_t>(z.size())},
           {u.data(), static_cast<std::size_t>(u.size())}, t,
           {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

Residuals DaeProblem::eval_residuals(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& u, double t) const {
  if (static_cast<std::size_t>(x.size()) != n() || static_cast<std::size_t>(y.size()) != m())
    throw ValidationError("residual evaluation: x/y length does not match the layout");
  Eigen::VectorXd z(x.size() + y.size());
  z << x, y;
  Eigen::VectorXd r = residual(z, u, t);
  return {r.head(x.size()), r.tail(y.size())};
}

SparseMatrix DaeProblem::jacobian(const Eigen::VectorXd& z, const Eigen::VectorXd& u,
                                  double t) const {
  if (static_cast<std::size_t>(z.size()) != size() ||
      static_cast<std::size_t>(u.size()) != discrete_->size())
    throw ValidationError("Jacobian evaluation: vector length does not match the layout");
  thread_local std::vector<Triplet> stamps;
  stamps.clear();
  stamp({{z.data(), static_cast<std::size_t>(z.size())},
         {u.data(), static_cast<std::size_t>(u.size())},
         t},
        stamps);
  const auto& slots = *slot_of_stamp_;
  if (stamps.size() != slots.size())
    throw std::logic_error("Jacobian stamp sequence changed after assembly");

  SparseMatrix J = *pattern_;
  double* values = J.valuePtr();
  for (std::size_t k = 0; k < stamps.size(); ++k) {
    values[slots[k]] += stamps[k].value();
  }
  const int nd = static_cast<int>(n());
  for (int col = 0; col < J.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(J, col); it; ++it) {
      if (it.row() < nd) it.valueRef() *= row_scale_[static_cast<std::size_t>(it.row())];
      if (!std::isfinite(it.value())) {
        const auto& name = (*layout_)[static_cast<std::size_t>(it.row())].name;
        throw EvaluationError(name, "non-finite Jacobian entry in equation '" + name +
                                        "' w.r.t. '" +
                                        (*layout_)[static_cast<std::size_t>(col)].name + "'");
      }
    }
  }
  return J;
}

JacobianBlocks DaeProblem::eval_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                          const Eigen::VectorXd& u, double t) const {
  Eigen::VectorXd z(x.size() + y.size());
  z << x, y;
  const SparseMatrix J = jacobian(z, u, t);
  const auto nd = static_cast<Eigen::Index>(n());
  const auto ma = static_cast<Eigen::Index>(m());
  JacobianBlocks b;
  b.fx = J.block(0, 0, nd, nd);
  b.fy = J.block(0, nd, nd, ma);
  b.gx = J.block(nd, 0, ma, nd);
  b.gy = J.block(nd, nd, ma, ma);
  return b;
}

void DaeProblem::check_discrete(const Eigen::VectorXd& u) const {
  if (static_cast<std::size_t>(u.size()) != discrete_->size())
    throw ValidationError("discrete state length does not match the layout");
  for (const auto& c : components_) c->check_discrete({u.data(), static_cast<std::size_t>(u.size())});
}

DaeProblem to_traditional(const DaeProblem& p) {
  DaeProblem out = p;
  for (std::size_t i = 0; i < p.n(); ++i) {
    const double mu = p.mass_.entries[i];
    if (!(mu > 0.0)) {
      throw ValidationError("not representable in traditional form: zero mass entry for '" +
                            p.layout()[i].name + "'");
    }
    out.row_scale_[i] = p.row_scale_[i] / mu;
    out.mass_.entries[i] = 1.0;
  }
  return out;
}

namespace {

std::pair<double, std::size_t> inf_norm(const Eigen::VectorXd& v) {
  double best = 0.0;
  std::size_t where = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      where = static_cast<std::size_t>(i);
    }
  }
  return {best, where};
}

}  // namespace

ConsistencyReport check_consistency(const DaeProblem& p, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& y, const Eigen::VectorXd& u, double t,
                                    double tol) {
  ConsistencyReport report;
  const Residuals r = p.eval_residuals(x, y, u, t);
  auto [fn, fi] = inf_norm(r.f);
  auto [gn, gi] = inf_norm(r.g);
  report.f_norm = fn;
  report.g_norm = gn;
  if (p.n() > 0) report.worst_f = p.layout()[fi].name;
  if (p.m() > 0) report.worst_g = p.layout()[p.n() + gi].name;
  report.pass = fn <= tol && gn <= tol;
  return report;
}

ConsistencyReport check_consistency(const DaeProblem& p, double tol) {
  const auto& ic = p.initial();
  return check_consistency(p, ic.x, ic.y, ic.u, ic.t, tol);
}

}  // namespace mmdae
