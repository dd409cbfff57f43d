#include "kirchhoff/kirchhoff_core.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <string>

#include "kirchhoff/errors.hpp"
#include "kirchhoff/kernels.hpp"

namespace kirchhoff {

namespace {

constexpr double kBaseRcondFloor = 1e-14;
constexpr double kDenominatorFloor = 1e-12;
constexpr double kSolveDefect = 1e-10;

BandMatrix assemble_base(const FieldVector& u, double lambda, const ProblemParams& params,
                         double coefficient) {
  const DiscreteOperators& ops = params.operators();
  const int n = static_cast<int>(ops.size());
  const int bw = stiffness_bandwidth(ops.mesh());
  BandMatrix base(n, bw, bw);
  base.add_sparse(ops.stiffness(), coefficient);
  if (lambda == 0.0) return base;
  std::vector<double> local;
  const Nonlinearity& f = params.f;
  kernels::parallel::element_weighted_mass(
      ops, u.values, [&f](double s) { return f.derivative(s); }, local);
  const ElementTables& t = ops.tables();
  const int npe = t.nodes_per_element;
  for (int e = 0; e < ops.mesh().element_count(); ++e) {
    const int* dofs = &t.local_dof[static_cast<std::size_t>(e) * npe];
    const double* m = &local[static_cast<std::size_t>(e) * npe * npe];
    for (int a = 0; a < npe; ++a) {
      if (dofs[a] < 0) continue;
      for (int c = 0; c < npe; ++c)
        if (dofs[c] >= 0) base.add(dofs[a], dofs[c], -lambda * m[a * npe + c]);
    }
  }
  return base;
}

Vector checked_stiffness_product(const FieldVector& u, const ProblemParams& params) {
  require_same_mesh(params.operators().mesh_id(), u.mesh_id, "JacobianSolver");
  return params.operators().apply_stiffness(u.values);
}

}  // namespace

ProblemParams make_problem(std::shared_ptr<const DiscreteOperators> ops, double a, double b,
                           Nonlinearity f) {
  if (!ops) throw InvalidArgumentError("problem needs discrete operators");
  if (!(a >= 0) || !std::isfinite(a)) throw InvalidArgumentError("Kirchhoff constant a must be >= 0");
  if (!(b > 0) || !std::isfinite(b)) throw InvalidArgumentError("Kirchhoff coefficient b must be > 0");
  return ProblemParams{a, b, std::move(ops), std::move(f)};
}

bool is_positive(const FieldVector& u) {
  return u.values.size() > 0 && u.values.minCoeff() > 0;
}

FieldNorms field_norms(const FieldVector& u, const DiscreteOperators& ops) {
  require_same_mesh(ops.mesh_id(), u.mesh_id, "field_norms");
  FieldNorms n;
  n.h1 = std::sqrt(std::max(0.0, ops.energy(u)));
  n.l2 = std::sqrt(std::max(0.0, ops.mass_inner(u.values, u.values)));
  if (u.values.size() > 0) {
    n.sup = u.values.cwiseAbs().maxCoeff();
    n.min = u.values.minCoeff();
  }
  return n;
}

Vector nemitsky_load(const FieldVector& u, const ProblemParams& params) {
  require_same_mesh(params.operators().mesh_id(), u.mesh_id, "nemitsky_load");
  Vector out;
  const Nonlinearity& f = params.f;
  kernels::parallel::galerkin_load(params.operators(), u.values,
                                   [&f](double s) { return f.value(s); }, out);
  return out;
}

Vector residual(const FieldVector& u, double lambda, const ProblemParams& params) {
  const DiscreteOperators& ops = params.operators();
  require_same_mesh(ops.mesh_id(), u.mesh_id, "residual");
  const Vector ku = ops.apply_stiffness(u.values);
  const double coefficient = params.a + params.b * u.values.dot(ku);
  Vector r = coefficient * ku;
  if (lambda != 0.0) r -= lambda * nemitsky_load(u, params);
  return r;
}

JacobianSolver::JacobianSolver(const FieldVector& u, double lambda, const ProblemParams& params)
    : two_b_(2.0 * params.b),
      w_(checked_stiffness_product(u, params)),
      base_(assemble_base(u, lambda, params, params.a + params.b * u.values.dot(w_))),
      lu_(base_),
      norm_(base_.norm1() + two_b_ * w_.squaredNorm()) {
  if (lu_.ok() && lu_.rcond() >= kBaseRcondFloor) {
    base_inv_w_ = lu_.solve(w_);
    denominator_ = 1.0 + two_b_ * w_.dot(base_inv_w_);
    sm_ready_ = std::abs(denominator_) >= kDenominatorFloor;
  }
}

Vector JacobianSolver::apply(const Vector& x) const {
  return base_.multiply(x) + (two_b_ * w_.dot(x)) * w_;
}

double JacobianSolver::relative_defect(const Vector& x, const Vector& rhs) const {
  // Normwise backward error.
  const double scale = norm_ * x.norm() + rhs.norm();
  return scale > 0 ? (apply(x) - rhs).norm() / scale : 0.0;
}

std::optional<Vector> JacobianSolver::try_sherman_morrison(const Vector& rhs) const {
  if (!sm_ready_) return std::nullopt;
  const Vector y = lu_.solve(rhs);
  return y - (two_b_ * w_.dot(y) / denominator_) * base_inv_w_;
}

Vector JacobianSolver::solve(const Vector& rhs) const {
  if (!lu_.ok() || lu_.rcond() < kBaseRcondFloor)
    throw SingularJacobianError("Jacobian base is singular (rcond " + std::to_string(lu_.rcond()) + ")",
                                SingularJacobianError::Source::base, lu_.rcond());
  if (!sm_ready_)
    throw SingularJacobianError("Sherman-Morrison denominator vanishes",
                                SingularJacobianError::Source::denominator, std::abs(denominator_));
  return *try_sherman_morrison(rhs);
}

Vector JacobianSolver::solve_robust(const Vector& rhs) const {
  if (rhs.norm() == 0.0) return Vector::Zero(rhs.size());
  if (auto x = try_sherman_morrison(rhs)) {
    // One step of iterative refinement recovers accuracy lost to a poorly
    // conditioned base.
    const Vector defect = rhs - apply(*x);
    if (auto dx = try_sherman_morrison(defect)) *x += *dx;
    if (relative_defect(*x, rhs) <= kSolveDefect) return *x;
  }
  return lifted_solve(nullptr, nullptr, 0.0, rhs, 0.0, nullptr);
}

std::pair<Vector, double> JacobianSolver::solve_bordered(const Vector& col, const Vector& row,
                                                         double corner, const Vector& rhs,
                                                         double s) const {
  auto bordered_defect = [&](const Vector& x, double y) {
    const double top = (apply(x) + y * col - rhs).norm();
    const double bottom = std::abs(row.dot(x) + corner * y - s);
    const double scale = (norm_ + row.norm()) * x.norm() + (col.norm() + std::abs(corner)) * std::abs(y) +
                         std::hypot(rhs.norm(), s);
    return scale > 0 ? std::hypot(top, bottom) / scale : 0.0;
  };
  if (sm_ready_) {
    const Vector x1 = *try_sherman_morrison(rhs);
    const Vector x2 = *try_sherman_morrison(col);
    const double schur = corner - row.dot(x2);
    if (std::abs(schur) > 1e-12 * (std::abs(corner) + row.norm() * x2.norm())) {
      const double y = (s - row.dot(x1)) / schur;
      const Vector x = x1 - y * x2;
      if (bordered_defect(x, y) <= kSolveDefect) return {x, y};
    }
  }
  double y = 0.0;
  Vector x = lifted_solve(&col, &row, corner, rhs, s, &y);
  return {std::move(x), y};
}

Vector JacobianSolver::lifted_solve(const Vector* col, const Vector* row, double corner,
                                    const Vector& rhs, double s, double* y) const {
  // Unknowns (x, z[, y]) with z = w^T x:
  //   B x + 2b w z [+ col y] = rhs
  //   w^T x - z               = 0
  //  [row^T x + corner y      = s]
  const int n = base_.size();
  const bool bordered = col != nullptr;
  const int dim = n + 1 + (bordered ? 1 : 0);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) * (2 * base_.lower() + 1) + 4 * n + 4);
  for (int c = 0; c < n; ++c) {
    for (int r = std::max(0, c - base_.upper()); r <= std::min(n - 1, c + base_.lower()); ++r) {
      const double v = base_(r, c);
      if (v != 0.0) entries.emplace_back(r, c, v);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (w_[i] != 0.0) {
      entries.emplace_back(i, n, two_b_ * w_[i]);
      entries.emplace_back(n, i, w_[i]);
    }
    if (bordered) {
      if ((*col)[i] != 0.0) entries.emplace_back(i, n + 1, (*col)[i]);
      if ((*row)[i] != 0.0) entries.emplace_back(n + 1, i, (*row)[i]);
    }
  }
  entries.emplace_back(n, n, -1.0);
  if (bordered && corner != 0.0) entries.emplace_back(n + 1, n + 1, corner);
  SparseMatrix lifted(dim, dim);
  lifted.setFromTriplets(entries.begin(), entries.end());
  lifted.makeCompressed();

  Vector b = Vector::Zero(dim);
  b.head(n) = rhs;
  if (bordered) b[n + 1] = s;
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(lifted);
  if (lu.info() != Eigen::Success)
    throw SingularJacobianError("lifted Jacobian system is singular",
                                SingularJacobianError::Source::bordered, 0.0);
  const Vector sol = lu.solve(b);
  double lifted_norm = 0.0;
  for (Eigen::Index c = 0; c < lifted.outerSize(); ++c) {
    double col_sum = 0.0;
    for (SparseMatrix::InnerIterator it(lifted, c); it; ++it) col_sum += std::abs(it.value());
    lifted_norm = std::max(lifted_norm, col_sum);
  }
  const double scale = lifted_norm * sol.norm() + b.norm();
  const double defect = scale > 0 ? (lifted * sol - b).norm() / scale : 0.0;
  if (lu.info() != Eigen::Success || !sol.allFinite() || defect > 1e-8)
    throw SingularJacobianError("lifted Jacobian solve is inaccurate (defect " +
                                    std::to_string(defect) + ")",
                                SingularJacobianError::Source::bordered, defect);
  if (y) *y = bordered ? sol[n + 1] : 0.0;
  return sol.head(n);
}

Vector jacobian_solve(const FieldVector& u, double lambda, const ProblemParams& params,
                      const Vector& rhs) {
  if (rhs.size() != params.operators().size())
    throw InvalidArgumentError("jacobian_solve: right-hand side has the wrong length");
  if (rhs.norm() == 0.0) return Vector::Zero(rhs.size());
  return JacobianSolver(u, lambda, params).solve(rhs);
}

double residual_threshold(const Vector& u, const ProblemParams& params, double tol) {
  const DiscreteOperators& ops = params.operators();
  const Vector ku = ops.apply_stiffness(u);
  const double coeff = params.a + params.b * u.dot(ku);
  const double floor =
      8 * std::numeric_limits<double>::epsilon() * coeff * infinity_norm(ops.stiffness()) * u.norm();
  return std::max(tol * (1.0 + (coeff * ku).norm()), floor);
}

Solution newton_solve(const FieldVector& u0, double lambda, const ProblemParams& params,
                      double tol, int max_iters) {
  const DiscreteOperators& ops = params.operators();
  require_same_mesh(ops.mesh_id(), u0.mesh_id, "newton_solve");
  if (!(tol > 0)) throw InvalidArgumentError("Newton tolerance must be positive");

  auto scaled_target = [&](const FieldVector& u) { return residual_threshold(u.values, params, tol); };

  FieldVector u = u0;
  Vector r = residual(u, lambda, params);
  double rnorm = r.norm();
  int stalled = 0;
  for (int it = 0;; ++it) {
    if (rnorm <= scaled_target(u))
      return Solution{u, lambda, rnorm, it, is_positive(u)};
    if (it == max_iters)
      throw ConvergenceError("Newton reached " + std::to_string(max_iters) +
                                 " iterations at residual " + std::to_string(rnorm),
                             rnorm, u.values);

    const Vector step = JacobianSolver(u, lambda, params).solve_robust(-r);
    double t = 1.0;
    FieldVector trial = u;
    Vector trial_r;
    double trial_norm = std::numeric_limits<double>::infinity();
    for (int halving = 0; halving <= 10; ++halving) {
      trial.values = u.values + t * step;
      trial_r = residual(trial, lambda, params);
      trial_norm = trial_r.norm();
      if (trial_norm < rnorm) break;
      t *= 0.5;
    }
    stalled = trial_norm < rnorm ? 0 : stalled + 1;
    if (stalled >= 5)
      throw DivergenceError("Newton residual failed to decrease over 5 damped steps", trial_norm);
    if (!std::isfinite(trial_norm))
      throw DivergenceError("Newton iterate is no longer finite", trial_norm);
    u = std::move(trial);
    r = std::move(trial_r);
    rnorm = trial_norm;
  }
}

FieldVector solve_G(const FieldVector& g, const DiscreteOperators& ops) {
  require_same_mesh(ops.mesh_id(), g.mesh_id, "solve_G");
  return ops.field(ops.solve_stiffness(ops.apply_mass(g.values)));
}

FieldVector solve_S(const FieldVector& g, const ProblemParams& params) {
  const DiscreteOperators& ops = params.operators();
  FieldVector w = solve_G(g, ops);
  const double energy = ops.energy(w);
  if (energy == 0.0) return w;
  w.values /= std::cbrt(params.b * energy);
  return w;
}

MonotonicityReport monotonicity_report(const FieldVector& u, const FieldVector& v,
                                       const ProblemParams& params) {
  const DiscreteOperators& ops = params.operators();
  require_same_mesh(ops.mesh_id(), u.mesh_id, "monotonicity_gap");
  require_same_mesh(ops.mesh_id(), v.mesh_id, "monotonicity_gap");
  const double b = params.b;
  const Vector ku = ops.apply_stiffness(u.values);
  const Vector kv = ops.apply_stiffness(v.values);
  const double eu = u.values.dot(ku);
  const double ev = v.values.dot(kv);
  const double cross = u.values.dot(kv);
  MonotonicityReport rep;
  rep.pairing = (b * eu * ku - b * ev * kv).dot(u.values - v.values);
  rep.pairing_expanded = b * (eu * eu + ev * ev - (eu + ev) * cross);
  const double diff = eu - ev;
  rep.stated_bound = b * diff * diff;
  rep.sharp_bound = 0.75 * b * diff * diff;
  rep.scale = b * (eu * eu + ev * ev);
  return rep;
}

double monotonicity_gap(const FieldVector& u, const FieldVector& v, const ProblemParams& params) {
  const MonotonicityReport rep = monotonicity_report(u, v, params);
  return rep.pairing - rep.stated_bound;
}

}  // namespace kirchhoff
