#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "kirchhoff/banded.hpp"
#include "kirchhoff/grid.hpp"
#include "kirchhoff/nonlinearity.hpp"

namespace kirchhoff {

/// -(a + b ||u||^2) Laplace u = lambda f(u) on a discretized domain.
struct ProblemParams {
  double a = 1.0;
  double b = 1.0;
  std::shared_ptr<const DiscreteOperators> ops;
  Nonlinearity f;

  const DiscreteOperators& operators() const { return *ops; }
};

/// Throws InvalidArgumentError unless a >= 0, b > 0 and ops is set.
ProblemParams make_problem(std::shared_ptr<const DiscreteOperators> ops, double a, double b,
                           Nonlinearity f);

struct Solution {
  FieldVector u;
  double lambda = 0.0;
  double residual_norm = 0.0;
  int newton_iters = 0;
  bool positive = false;
};

/// True when every interior value is strictly positive.
bool is_positive(const FieldVector& u);

struct FieldNorms {
  double h1 = 0.0;   // sqrt(u^T K u)
  double l2 = 0.0;   // sqrt(u^T M u)
  double sup = 0.0;
  double min = 0.0;  // smallest interior value (0 for an empty field)
};

FieldNorms field_norms(const FieldVector& u, const DiscreteOperators& ops);

/// Galerkin Nemitsky load: N_i = integral of f(u_h) phi_i.
Vector nemitsky_load(const FieldVector& u, const ProblemParams& params);

/// r = (a + b u^T K u) K u - lambda N(u).
Vector residual(const FieldVector& u, double lambda, const ProblemParams& params);

/// Stopping threshold tol (1 + ||(a + b E) K u||), raised to the round-off
/// floor 8 eps (a + b E) ||K||_inf ||u|| of evaluating the residual.
double residual_threshold(const Vector& u, const ProblemParams& params, double tol);

/// Newton linearization J = (a + b u^T K u) K + 2b (Ku)(Ku)^T - lambda W, with
/// W_ij = integral of f'(u_h) phi_i phi_j. The banded base B = J - 2b (Ku)(Ku)^T
/// is factored once; solves use Sherman-Morrison on the rank-one term.
class JacobianSolver {
 public:
  JacobianSolver(const FieldVector& u, double lambda, const ProblemParams& params);

  double base_rcond() const { return lu_.rcond(); }
  int base_sign_determinant() const { return lu_.sign_determinant(); }
  /// w = K u, the rank-one direction.
  const Vector& rank_one_vector() const { return w_; }

  Vector apply(const Vector& x) const;

  /// Sherman-Morrison solve. Throws SingularJacobianError when the base is
  /// (nearly) singular or the denominator |1 + 2b w^T B^{-1} w| < 1e-12.
  Vector solve(const Vector& rhs) const;

  /// Sherman-Morrison when it is accurate, otherwise a sparse LU of the lifted
  /// system [[B, 2b w], [w^T, -1]] which stays regular when only B is singular.
  Vector solve_robust(const Vector& rhs) const;

  /// Solves [[J, col], [row^T, corner]] (x, y) = (rhs, s) by block elimination,
  /// falling back to a lifted sparse system when the blocks are ill conditioned.
  std::pair<Vector, double> solve_bordered(const Vector& col, const Vector& row, double corner,
                                           const Vector& rhs, double s) const;

 private:
  std::optional<Vector> try_sherman_morrison(const Vector& rhs) const;
  Vector lifted_solve(const Vector* col, const Vector* row, double corner, const Vector& rhs,
                      double s, double* y) const;
  double relative_defect(const Vector& x, const Vector& rhs) const;

  double two_b_ = 0.0;
  Vector w_;
  BandMatrix base_;
  BandedLU lu_;
  Vector base_inv_w_;
  double denominator_ = 0.0;
  bool sm_ready_ = false;
  /// ||B||_1 + 2b ||w||^2, the scale for backward errors.
  double norm_ = 0.0;
};

/// J^{-1} rhs by Sherman-Morrison; see JacobianSolver::solve.
Vector jacobian_solve(const FieldVector& u, double lambda, const ProblemParams& params,
                      const Vector& rhs);

/// Damped Newton: up to 10 step halvings when ||r|| does not decrease; stops
/// when ||r|| <= tol (1 + ||(a + b ||u||^2) K u||). Five consecutive steps
/// without decrease raise DivergenceError; the cap raises ConvergenceError.
Solution newton_solve(const FieldVector& u0, double lambda, const ProblemParams& params,
                      double tol = 1e-10, int max_iters = 50);

/// K u = M g.
FieldVector solve_G(const FieldVector& g, const DiscreteOperators& ops);

/// b (u^T K u) K u = M g, closed form u = G(g) / (b G(g)^T K G(g))^{1/3}.
FieldVector solve_S(const FieldVector& g, const ProblemParams& params);

struct MonotonicityReport {
  /// <L(u) - L(v), u - v> with L(w) = b (w^T K w) K w, evaluated directly.
  double pairing = 0.0;
  /// The same pairing expanded as b (|u|^4 + |v|^4 - (|u|^2 + |v|^2) u^T K v).
  double pairing_expanded = 0.0;
  /// b (|u|^2 - |v|^2)^2.
  double stated_bound = 0.0;
  /// (3b/4)(|u|^2 - |v|^2)^2, which the Cauchy-Schwarz step does guarantee.
  double sharp_bound = 0.0;
  /// b (|u|^4 + |v|^4), the natural round-off scale.
  double scale = 0.0;
};

MonotonicityReport monotonicity_report(const FieldVector& u, const FieldVector& v,
                                       const ProblemParams& params);

/// pairing - b (u^T K u - v^T K v)^2.
double monotonicity_gap(const FieldVector& u, const FieldVector& v, const ProblemParams& params);

}  // namespace kirchhoff
