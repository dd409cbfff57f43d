#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "kirchhoff/errors.hpp"
#include "kirchhoff/kirchhoff_core.hpp"
#include "kirchhoff/spectra_linear.hpp"
#include "kirchhoff/spectra_nonlocal.hpp"

using namespace kirchhoff;
using std::numbers::pi;

namespace {

std::shared_ptr<const DiscreteOperators> interval(double lo, double hi, int n) {
  return std::make_shared<const DiscreteOperators>(
      assemble_operators(build_mesh(DomainKind::interval, {{lo, hi}}, n)));
}

Vector random_vector(Eigen::Index n, std::uint64_t seed, double lo = -1, double hi = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

ProblemParams cubic_problem(std::shared_ptr<const DiscreteOperators> ops, double a, double b) {
  NonlinearityParams p;
  p.f0 = 0.8;
  p.f_inf = 0.7;
  p.a = a;
  p.b = b;
  p.lambda1 = principal_eigenpair(*ops).lambda;
  p.mu1 = 100.0;
  return make_problem(ops, a, b, make_nonlinearity(NonlinearityKind::sum_linear_cubic, p));
}

// Dense Jacobian of the 1D problem with f = c1 s + c3 s^3: the weighted mass
// integral of (c1 + 3 c3 u_h^2) phi_i phi_j is a quartic per element and is
// integrated exactly with Boole's rule.
Eigen::MatrixXd dense_jacobian(const FieldVector& u, double lambda, const ProblemParams& params) {
  const DiscreteOperators& ops = params.operators();
  const Mesh& mesh = ops.mesh();
  const Eigen::MatrixXd k = ops.stiffness();
  const Eigen::VectorXd ku = k * u.values;
  const double c1 = params.f.linear_coefficient();
  const double c3 = params.f.cubic_coefficient();
  const auto vals = ops.nodal_values(u);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(ops.size(), ops.size());
  const double bw[5] = {7, 32, 12, 32, 7};
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element(e);
    const double h = mesh.element_measure(e);
    for (int q = 0; q < 5; ++q) {
      const double t = q / 4.0;
      const double uq = vals[nodes[0]] * (1 - t) + vals[nodes[1]] * t;
      const double phi[2] = {1 - t, t};
      const double weight = bw[q] * h / 90.0 * (c1 + 3 * c3 * uq * uq);
      for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) {
          const int da = mesh.dof(nodes[a]), dc = mesh.dof(nodes[c]);
          if (da >= 0 && dc >= 0) w(da, dc) += weight * phi[a] * phi[c];
        }
    }
  }
  return (params.a + params.b * u.values.dot(ku)) * k + 2 * params.b * ku * ku.transpose() - lambda * w;
}

}  // namespace

TEST_CASE("trivial solution line") {
  const auto ops = interval(0, 1, 32);
  const ProblemParams params = cubic_problem(ops, 1, 1);
  for (double lambda : {0.0, 0.5, 3.0}) CHECK(residual(ops->zeros(), lambda, params).norm() == 0.0);
}

TEST_CASE("pure_linear exact branch") {
  // r = (a + b|u|^2)(K u - lambda1 M u), so the eigen residual is amplified by
  // the Kirchhoff coefficient; solve the eigenproblem tightly.
  const auto ops = interval(0, pi, 128);
  const EigenPair p1 = principal_eigenpair(*ops, 1e-12);
  NonlinearityParams np;
  const ProblemParams params = make_problem(ops, 1, 1, make_nonlinearity(NonlinearityKind::pure_linear, np));
  const double e1 = ops->energy(p1.phi);
  for (double t : {0.1, 1.0, 4.0}) {
    const FieldVector u = t * p1.phi;
    const double lambda = p1.lambda * (1 + t * t * e1);
    const Vector ku = ops->apply_stiffness(u.values);
    CHECK(residual(u, lambda, params).norm() / ku.norm() <= 1e-10);
  }
}

TEST_CASE("pure_cubic with the nonlocal eigenfunction") {
  const auto ops = interval(0, 1, 128);
  const NonlocalEigenPair psi = minimize_mu1(*ops, ops->interpolate([](double x, double) { return x * (1 - x); }), 1e-11);
  NonlinearityParams np;
  np.f_inf = 0.6;
  np.a = 1.0;
  np.b = 2.0;
  np.mu1 = psi.mu;
  const ProblemParams params = make_problem(ops, 1.0, 2.0, make_nonlinearity(NonlinearityKind::pure_cubic, np));
  const double e = ops->energy(psi.psi);
  for (double t : {0.3, 2.0}) {
    const double lambda = (params.a + params.b * t * t * e) / (params.b * np.f_inf * t * t * e);
    const FieldVector u = t * psi.psi;
    CHECK(residual(u, lambda, params).norm() / ops->apply_stiffness(u.values).norm() <= 1e-8);
  }
}

TEST_CASE("a = 0 residual is homogeneous of degree 3 for pure_cubic") {
  const auto ops = interval(0, 1, 64);
  NonlinearityParams np;
  np.f_inf = 1.0;
  np.a = 0.0;
  np.mu1 = 50.0;
  const ProblemParams params = make_problem(ops, 0.0, 1.5, make_nonlinearity(NonlinearityKind::pure_cubic, np));
  const FieldVector u = ops->field(random_vector(ops->size(), 2));
  const Vector r = residual(u, 0.7, params);
  for (double t : {0.5, 3.0}) CHECK((residual(t * u, 0.7, params) - t * t * t * r).norm() <= 1e-12 * t * t * t * r.norm());
}

TEST_CASE("Jacobian matches the dense oracle and finite differences") {
  const auto ops = interval(0, 1, 32);
  const ProblemParams params = cubic_problem(ops, 1.3, 0.4);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const FieldVector u = ops->field(random_vector(ops->size(), 100 + trial, -0.5, 1.0));
    const Vector d = random_vector(ops->size(), 200 + trial);
    const double lambda = 0.3 + 0.1 * trial;
    const Eigen::MatrixXd j = dense_jacobian(u, lambda, params);
    const JacobianSolver solver(u, lambda, params);
    CHECK((solver.apply(d) - j * d).norm() <= 1e-12 * (j * d).norm());

    const double eps = 1e-6 * std::max(1.0, u.values.norm());
    const FieldVector up{u.values + eps * d, u.mesh_id}, um{u.values - eps * d, u.mesh_id};
    const Vector fd = (residual(up, lambda, params) - residual(um, lambda, params)) / (2 * eps);
    CHECK((fd - j * d).norm() <= 1e-6 * (j * d).norm());

    const Vector rhs = random_vector(ops->size(), 300 + trial);
    const Vector x = jacobian_solve(u, lambda, params, rhs);
    const Vector oracle = j.lu().solve(rhs);
    CHECK((x - oracle).norm() <= 1e-10 * oracle.norm());
  }
  const FieldVector u = ops->field(random_vector(ops->size(), 9));
  CHECK(jacobian_solve(u, 1.0, params, Vector::Zero(ops->size())).norm() == 0.0);
}

TEST_CASE("Sherman-Morrison on a 2D mesh with 49 dofs") {
  const auto ops = std::make_shared<const DiscreteOperators>(
      assemble_operators(build_mesh(DomainKind::rectangle, {{0, 1}, {0, 1}}, 8)));
  const ProblemParams params = cubic_problem(ops, 1.0, 1.0);
  const FieldVector u = ops->field(random_vector(ops->size(), 4, 0, 1));
  const JacobianSolver solver(u, 0.9, params);
  Eigen::MatrixXd j(ops->size(), ops->size());
  for (Eigen::Index c = 0; c < ops->size(); ++c) j.col(c) = solver.apply(Vector::Unit(ops->size(), c));
  const Vector rhs = random_vector(ops->size(), 6);
  const Vector oracle = j.lu().solve(rhs);
  CHECK((solver.solve(rhs) - oracle).norm() <= 1e-10 * oracle.norm());
}

TEST_CASE("base is singular at the bifurcation point from the trivial line") {
  const auto ops = interval(0, 1, 64);
  const ProblemParams params = cubic_problem(ops, 1.0, 1.0);
  const double lambda = 1.0 / params.f.declared().f0;
  try {
    jacobian_solve(ops->zeros(), lambda, params, Vector::Ones(ops->size()));
    FAIL("expected a singular Jacobian");
  } catch (const SingularJacobianError& e) {
    CHECK(e.source() == SingularJacobianError::Source::base);
  }
}

TEST_CASE("robust and bordered solves on the singular-base branch") {
  // On the pure_linear branch B = (a + b|u|^2)(K - lambda1 M) is singular but J is not.
  const auto ops = interval(0, pi, 64);
  const EigenPair p1 = principal_eigenpair(*ops);
  const ProblemParams params = make_problem(ops, 1, 1, make_nonlinearity(NonlinearityKind::pure_linear, {}));
  const FieldVector u = 2.0 * p1.phi;
  const double lambda = p1.lambda * (1 + ops->energy(u));
  const JacobianSolver solver(u, lambda, params);
  const Vector rhs = random_vector(ops->size(), 8);
  const Vector x = solver.solve_robust(rhs);
  CHECK((solver.apply(x) - rhs).norm() <= 1e-9 * rhs.norm());

  const Vector col = random_vector(ops->size(), 10);
  const Vector row = random_vector(ops->size(), 11);
  const auto [bx, by] = solver.solve_bordered(col, row, 0.3, rhs, 0.7);
  CHECK((solver.apply(bx) + by * col - rhs).norm() <= 1e-9 * rhs.norm());
  CHECK(std::abs(row.dot(bx) + 0.3 * by - 0.7) <= 1e-9);
}

TEST_CASE("Newton on the exact pure_linear branch") {
  const auto ops = interval(0, pi, 128);
  const EigenPair p1 = principal_eigenpair(*ops);
  const ProblemParams params = make_problem(ops, 1, 1, make_nonlinearity(NonlinearityKind::pure_linear, {}));
  const double t = 1.5;
  const double lambda = p1.lambda * (1 + t * t * ops->energy(p1.phi));
  const Solution s = newton_solve(1.1 * t * p1.phi, lambda, params, 1e-12, 20);
  CHECK((s.u.values - t * p1.phi.values).norm() <= 1e-8 * t * p1.phi.values.norm());
  CHECK(s.newton_iters <= 8);
  CHECK(s.positive);
}

TEST_CASE("Newton from zero stays on the trivial line") {
  const auto ops = interval(0, 1, 64);
  const ProblemParams params = cubic_problem(ops, 1.0, 1.0);
  const Solution s = newton_solve(ops->zeros(), 0.37, params);
  CHECK(s.u.values.norm() == 0.0);
  CHECK(s.newton_iters == 0);
  CHECK_FALSE(s.positive);
}

TEST_CASE("Newton reports the iteration cap") {
  const auto ops = interval(0, 1, 64);
  const ProblemParams params = cubic_problem(ops, 1.0, 1.0);
  const FieldVector u0 = ops->field(random_vector(ops->size(), 3, 0, 5));
  CHECK_THROWS_AS(newton_solve(u0, 2.0, params, 1e-14, 1), ConvergenceError);
}

TEST_CASE("solve_G") {
  const auto ops = interval(0, 1, 128);
  const EigenPair p1 = principal_eigenpair(*ops);
  const FieldVector u = solve_G(p1.lambda * p1.phi, *ops);
  CHECK((u.values - p1.phi.values).norm() <= 1e-8 * p1.phi.values.norm());
  const FieldVector g = ops->field(random_vector(ops->size(), 1));
  CHECK((solve_G(2.0 * g, *ops).values - 2.0 * solve_G(g, *ops).values).norm() <=
        1e-12 * solve_G(g, *ops).values.norm());
  const FieldVector pos = solve_G(ops->field(random_vector(ops->size(), 2, 0.01, 1)), *ops);
  CHECK(pos.values.minCoeff() > 0);
}

TEST_CASE("solve_S") {
  const auto ops = interval(0, 1, 64);
  const ProblemParams params = cubic_problem(ops, 1.0, 0.75);
  const FieldVector g = ops->field(random_vector(ops->size(), 12));
  const FieldVector u = solve_S(g, params);
  const Vector ku = ops->apply_stiffness(u.values);
  const Vector lhs = params.b * u.values.dot(ku) * ku;
  const Vector rhs = ops->apply_mass(g.values);
  CHECK((lhs - rhs).norm() <= 1e-10 * rhs.norm());
  const double t = 1.7;
  CHECK((solve_S(t * t * t * g, params).values - t * u.values).norm() <= 1e-10 * t * u.values.norm());
  ProblemParams doubled = params;
  doubled.b *= 2;
  CHECK((solve_S(g, doubled).values - std::cbrt(0.5) * u.values).norm() <= 1e-12 * u.values.norm());
  CHECK(solve_S(ops->zeros(), params).values.norm() == 0.0);
}

TEST_CASE("monotonicity of the nonlocal operator") {
  const auto ops = interval(0, 1, 32);
  const ProblemParams params = cubic_problem(ops, 1.0, 0.9);
  const FieldVector u = ops->field(random_vector(ops->size(), 21));
  CHECK(monotonicity_gap(u, u, params) == 0.0);
  for (int trial = 0; trial < 100; ++trial) {
    const FieldVector a = ops->field(random_vector(ops->size(), 1000 + 2 * trial));
    const FieldVector b = ops->field(random_vector(ops->size(), 1001 + 2 * trial));
    const MonotonicityReport rep = monotonicity_report(a, b, params);
    CHECK(std::abs(rep.pairing - rep.pairing_expanded) <= 1e-12 * rep.scale);
    CHECK(monotonicity_gap(a, b, params) >= -1e-12 * rep.scale);
    CHECK(rep.pairing >= rep.sharp_bound);
  }
}

TEST_CASE("collinear pairs: v = 2u") {
  const auto ops = interval(0, 1, 32);
  const ProblemParams params = cubic_problem(ops, 1.0, 0.9);
  const FieldVector u = ops->field(random_vector(ops->size(), 22));
  const double e = ops->energy(u);
  const double unit = params.b * e * e;
  const MonotonicityReport rep = monotonicity_report(u, 2.0 * u, params);
  CHECK(rep.pairing == doctest::Approx(7 * unit).epsilon(1e-12));
  CHECK(rep.pairing_expanded == doctest::Approx(7 * unit).epsilon(1e-12));
  CHECK(rep.stated_bound == doctest::Approx(9 * unit).epsilon(1e-12));
  // The stated bound fails on collinear pairs; the Cauchy-Schwarz chain only
  // supports the factor 3/4.
  CHECK(monotonicity_gap(u, 2.0 * u, params) == doctest::Approx(-2 * unit).epsilon(1e-10));
  CHECK(rep.pairing >= rep.sharp_bound);
}

TEST_CASE("parameter validation") {
  const auto ops = interval(0, 1, 8);
  CHECK_THROWS_AS(make_problem(ops, -1, 1, {}), InvalidArgumentError);
  CHECK_THROWS_AS(make_problem(ops, 1, 0, {}), InvalidArgumentError);
  CHECK_THROWS_AS(make_problem(nullptr, 1, 1, {}), InvalidArgumentError);
  const auto other = interval(0, 2, 8);
  const ProblemParams params = make_problem(ops, 1, 1, {});
  CHECK_THROWS_AS(residual(other->zeros(), 1.0, params), ProvenanceError);
}
