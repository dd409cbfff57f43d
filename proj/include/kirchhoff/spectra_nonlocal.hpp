#pragma once

#include <cstdint>
#include <vector>

#include "kirchhoff/grid.hpp"

namespace kirchhoff {

/// Eigenpair of (integral |grad u|^2) (-Laplace u) = mu u^3, normalized so that
/// the integral of psi^4 is 1. Then mu = (psi^T K psi)^2.
struct NonlocalEigenPair {
  double mu = 0.0;
  FieldVector psi;
  /// ||E K psi - mu q(psi)|| / ||E K psi|| with E = psi^T K psi and q the
  /// Galerkin load of psi^3.
  double residual = 0.0;
  std::uint64_t converged_from = 0;
  int iterations = 0;
  bool converged = false;
};

/// (u^T K u)^2 / integral u^4.
double nonlocal_quotient(const DiscreteOperators& ops, const FieldVector& u);

/// Relative residual of the discrete eigen equation for a given (mu, u);
/// u need not be normalized.
double nonlocal_residual(const DiscreteOperators& ops, const FieldVector& u, double mu);

/// Sobolev-preconditioned projected descent on I(u) = (u^T K u)^2 over
/// integral u^4 = 1. Each step moves toward K^{-1} q(u) (the nonlinear inverse
/// iteration direction), backtracks until I does not increase and renormalizes.
/// tol is clamped to the round-off floor 4 eps ||K|| ||u|| / ||K u||.
/// Throws InvalidSeedError for a zero seed and ConvergenceError at the cap.
NonlocalEigenPair minimize_mu1(const DiscreteOperators& ops, const FieldVector& seed,
                               double tol = 1e-9, int max_iters = 5000,
                               std::uint64_t seed_id = 0);

/// The same minimization restricted to fields odd under reflection about the
/// midpoint in x. An upper bound on the second minimax level.
/// Throws UnsupportedDomainError when the odd subspace is trivial.
NonlocalEigenPair estimate_mu2(const DiscreteOperators& ops, double tol = 1e-9,
                               int max_iters = 5000);

/// Reflection x -> x0 + x1 - x acting on interior values.
Vector reflect_x(const DiscreteOperators& ops, const Vector& u);

struct NodalDecomposition {
  /// Mesh node indices per component.
  std::vector<std::vector<int>> components;
  std::vector<double> measures;
  std::vector<int> sign;

  std::size_t size() const { return components.size(); }
};

/// Connected strictly signed regions by flood fill over element adjacency.
/// A negative zero_band selects 1e-8 max|u|. In 1D elements are split pro-rata
/// at sign changes; in 2D each element goes whole to the component owning its
/// largest |u| node.
NodalDecomposition nodal_domains(const FieldVector& u, const DiscreteOperators& ops,
                                 double zero_band = -1.0);

/// Element sum of |grad u|^2 + r^2 |grad v|^2 - 2 r grad u . grad v with
/// centre gradients and r = u/v at the element centre.
/// Throws PositivityError unless v > 0 at every interior node.
double picone_defect(const FieldVector& u, const FieldVector& v, const DiscreteOperators& ops);

/// Admissible negative excursion of picone_defect: 1e-10 (||u||^2 + ||v||^2).
double picone_slack(const FieldVector& u, const FieldVector& v, const DiscreteOperators& ops);

struct SeedRun {
  std::uint64_t seed_id = 0;
  bool positive_seed = false;
  bool converged = false;
  double mu = 0.0;
  int iterations = 0;
};

struct GapReport {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double gap = 0.0;
  bool refined = false;
  double refined_mu1 = 0.0;
  double refined_mu2 = 0.0;
  double refined_gap = 0.0;
  /// |refined_gap - gap| / gap.
  double relative_change = 0.0;
  std::vector<SeedRun> runs;
  /// Distinct converged values in [mu1, mu1 + gap/2] (clustered at 1e-6 relative).
  std::vector<double> window_values;
  /// Over positive seeds: largest relative deviation from mu1 and largest
  /// L2 distance between |psi| profiles.
  double max_positive_mu_deviation = 0.0;
  double max_positive_psi_distance = 0.0;
  bool only_mu1_in_window = false;
};

struct IsolationOptions {
  int positive_seeds = 10;
  int sign_changing_seeds = 10;
  bool refine = true;
  double tol = 1e-9;
  int max_iters = 5000;
  std::uint64_t rng_seed = 0;
};

/// Gap mu2 - mu1, its change under one uniform refinement and a multi-start
/// sweep of minimize_mu1. Throws InvalidArgumentError for unconverged or
/// foreign pairs and InconsistentSpectrumError when mu2 < mu1.
GapReport isolation_probe(const DiscreteOperators& ops, const NonlocalEigenPair& mu1_pair,
                          const NonlocalEigenPair& mu2_pair, const IsolationOptions& options = {});

}  // namespace kirchhoff
