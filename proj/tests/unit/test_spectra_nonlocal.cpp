#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kirchhoff/errors.hpp"
#include "kirchhoff/spectra_linear.hpp"
#include "kirchhoff/spectra_nonlocal.hpp"
#include "oracles.hpp"

using namespace kirchhoff;
using std::numbers::pi;

namespace {

DiscreteOperators interval_ops(double lo, double hi, int n) {
  return assemble_operators(build_mesh(DomainKind::interval, {{lo, hi}}, n));
}

FieldVector positive_random(const DiscreteOperators& ops, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.1, 1.0);
  Vector v(ops.size());
  for (auto& x : v) x = dist(rng);
  return ops.field(v);
}

}  // namespace

TEST_CASE("mu1 on (0, 1) matches the shooting oracle") {
  const double reference = oracle::shooting_mu1(1.0);
  const DiscreteOperators ops = interval_ops(0, 1, 512);
  const NonlocalEigenPair pair = minimize_mu1(ops, positive_random(ops, 1), 1e-9, 5000, 1);
  CHECK(pair.converged);
  CHECK(std::abs(pair.mu / reference - 1) < 1e-3);
  CHECK(std::abs(integrate_power(pair.psi, 4, ops) - 1) < 1e-10);
  const double e = ops.energy(pair.psi);
  CHECK(std::abs(pair.mu / (e * e) - 1) < 1e-8);
  CHECK(pair.residual <= 1e-9);
  CHECK(nonlocal_residual(ops, pair.psi, pair.mu) <= 1e-9);
  CHECK(pair.psi.values.minCoeff() > 0);
  CHECK(pair.converged_from == 1);
}

TEST_CASE("shooting oracle agrees with a brute-force fine-grid minimization") {
  const DiscreteOperators fine = interval_ops(0, 1, 4096);
  const FieldVector seed = fine.interpolate([](double x, double) { return x * (1 - x); });
  const NonlocalEigenPair pair = minimize_mu1(fine, seed, 1e-8, 5000);
  CHECK(std::abs(pair.mu / oracle::shooting_mu1(1.0) - 1) < 1e-5);
}

TEST_CASE("dilation law mu1(0, 2) = mu1(0, 1) / 8") {
  const DiscreteOperators a = interval_ops(0, 1, 256);
  const DiscreteOperators b = interval_ops(0, 2, 256);
  const double m1 = minimize_mu1(a, positive_random(a, 2)).mu;
  const double m2 = minimize_mu1(b, positive_random(b, 2)).mu;
  CHECK(std::abs(m2 / (m1 / 8) - 1) < 1e-3);
  CHECK(std::abs(m2 / (m1 / 8) - 1) < 1e-8);  // exact at equal resolution
}

TEST_CASE("negated seed gives the same mu and negated psi") {
  const DiscreteOperators ops = interval_ops(0, 1, 128);
  const FieldVector seed = positive_random(ops, 3);
  const NonlocalEigenPair p = minimize_mu1(ops, seed);
  const NonlocalEigenPair n = minimize_mu1(ops, -seed);
  CHECK(n.mu == doctest::Approx(p.mu).epsilon(1e-10));
  CHECK((n.psi.values + p.psi.values).norm() < 1e-6 * p.psi.values.norm());
}

TEST_CASE("seed and cap errors") {
  const DiscreteOperators ops = interval_ops(0, 1, 64);
  CHECK_THROWS_AS(minimize_mu1(ops, ops.zeros()), InvalidSeedError);
  try {
    minimize_mu1(ops, positive_random(ops, 4), 1e-9, 2);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_iterate().size() == ops.size());
  }
}

TEST_CASE("quotient homogeneity") {
  const DiscreteOperators ops =
      assemble_operators(build_mesh(DomainKind::rectangle, {{0, 1}, {0, 1}}, 10));
  const FieldVector u = positive_random(ops, 5);
  const double base = nonlocal_quotient(ops, u);
  for (double t : {-3.0, 0.01, 7.5}) CHECK(std::abs(nonlocal_quotient(ops, t * u) / base - 1) < 1e-12);
}

TEST_CASE("mu2 estimate on (0, 1)") {
  const int n = 256;
  const DiscreteOperators ops = interval_ops(0, 1, n);
  const NonlocalEigenPair mu1 = minimize_mu1(ops, positive_random(ops, 6));
  const NonlocalEigenPair mu2 = estimate_mu2(ops);
  CHECK(mu2.mu > mu1.mu);
  CHECK(mu2.residual <= 1e-9);
  CHECK(nonlocal_residual(ops, mu2.psi, mu2.mu) <= 1e-9);
  // Odd fields on N elements are two copies of the principal profile on
  // (0, 1/2) with N/2 elements: mu = 2 * 8 * mu1(0, 1; N/2).
  const DiscreteOperators half = interval_ops(0, 1, n / 2);
  const double coarse = minimize_mu1(half, positive_random(half, 7)).mu;
  CHECK(std::abs(mu2.mu / (16 * coarse) - 1) < 1e-8);

  const NodalDecomposition nodal = nodal_domains(mu2.psi, ops);
  REQUIRE(nodal.size() == 2);
  CHECK(nodal.sign[0] == -nodal.sign[1]);
  for (double m : nodal.measures) {
    CHECK(std::abs(m - 0.5) <= 1.0 / n);
    CHECK(m >= std::cbrt(16.0 / mu2.mu));
  }
}

TEST_CASE("mu2 estimate on a rectangle changes sign") {
  const DiscreteOperators ops =
      assemble_operators(build_mesh(DomainKind::rectangle, {{0, 2}, {0, 1}}, {16, 8}));
  const NonlocalEigenPair mu2 = estimate_mu2(ops);
  CHECK(mu2.psi.values.minCoeff() < 0);
  CHECK(mu2.psi.values.maxCoeff() > 0);
  CHECK(nodal_domains(mu2.psi, ops).size() == 2);
}

TEST_CASE("mu2 needs a nontrivial odd subspace") {
  CHECK_THROWS_AS(estimate_mu2(interval_ops(0, 1, 2)), UnsupportedDomainError);
}

TEST_CASE("nodal domains of sampled fields") {
  const DiscreteOperators ops = interval_ops(0, pi, 256);
  const double h = pi / 256;
  const NodalDecomposition two = nodal_domains(ops.interpolate([](double x, double) { return std::sin(2 * x); }), ops);
  REQUIRE(two.size() == 2);
  for (double m : two.measures) CHECK(std::abs(m - pi / 2) <= h);
  const NodalDecomposition one = nodal_domains(principal_eigenpair(ops).phi, ops);
  REQUIRE(one.size() == 1);
  CHECK(std::abs(one.measures[0] - pi) <= h);
  CHECK(nodal_domains(ops.zeros(), ops).size() == 0);

  const DiscreteOperators odd = interval_ops(0, pi, 255);  // sign change inside an element
  const NodalDecomposition split = nodal_domains(odd.interpolate([](double x, double) { return std::sin(2 * x); }), odd);
  REQUIRE(split.size() == 2);
  CHECK(std::abs(split.measures[0] + split.measures[1] - pi) < 1e-12);
  for (double m : split.measures) CHECK(std::abs(m - pi / 2) <= pi / 255);
}

TEST_CASE("2D nodal domains of sin(x) sin(2y)") {
  const DiscreteOperators ops =
      assemble_operators(build_mesh(DomainKind::rectangle, {{0, pi}, {0, pi}}, 32));
  const NodalDecomposition d =
      nodal_domains(ops.interpolate([](double x, double y) { return std::sin(x) * std::sin(2 * y); }), ops);
  REQUIRE(d.size() == 2);
  for (double m : d.measures) CHECK(std::abs(m - pi * pi / 2) <= pi * pi / 32);
}

TEST_CASE("Picone defect") {
  const DiscreteOperators ops = interval_ops(0, pi, 128);
  const FieldVector phi = principal_eigenpair(ops).phi;
  CHECK(picone_defect(phi, phi, ops) == 0.0);
  CHECK(picone_defect(2.0 * phi, phi, ops) == 0.0);
  const FieldVector s = ops.interpolate([](double x, double) { return std::sin(x); });
  const FieldVector v = s + 0.5 * phi;
  CHECK(picone_defect(s, v, ops) >= 0.0);
  CHECK_THROWS_AS(picone_defect(s, -phi, ops), PositivityError);

  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> pos(0.05, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector a(ops.size()), b(ops.size());
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = pos(rng);
    const FieldVector u = ops.field(a), w = ops.field(b);
    CHECK(picone_defect(u, w, ops) >= -picone_slack(u, w, ops));
  }
}

TEST_CASE("isolation probe on (0, 1)") {
  const DiscreteOperators ops = interval_ops(0, 1, 256);
  const NonlocalEigenPair mu1 = minimize_mu1(ops, positive_random(ops, 8));
  const NonlocalEigenPair mu2 = estimate_mu2(ops);
  const GapReport report = isolation_probe(ops, mu1, mu2);
  CHECK(report.gap > 0);
  CHECK(report.refined);
  CHECK(report.refined_gap > 0);
  CHECK(report.relative_change < 0.1);
  CHECK(report.runs.size() == 20);
  CHECK(report.only_mu1_in_window);
  CHECK(report.max_positive_mu_deviation < 1e-6);
  CHECK(report.max_positive_psi_distance < 1e-5);
  CHECK_THROWS_AS(isolation_probe(ops, mu2, mu1), InconsistentSpectrumError);
}

TEST_CASE("minimization converges on fine meshes where the quotient stops resolving descent") {
  const auto ops = assemble_operators(build_mesh(DomainKind::interval, {{0, 1}}, 2048));
  const NonlocalEigenPair p = minimize_mu1(ops, ops.field(Vector::Ones(ops.size())), 1e-11);
  CHECK(p.converged);
  CHECK(p.mu == doctest::Approx(oracle::shooting_mu1()).epsilon(1e-6));
}
