#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kirchhoff/kirchhoff_core.hpp"
#include "kirchhoff/nonlinearity.hpp"

namespace kirchhoff {

struct BifurcationPoint {
  double lambda_star = 0.0;
  /// Discrete principal eigenfunction (M-normalized, positive).
  FieldVector direction;
  /// Discrete lambda1 used for the formula.
  double lambda1 = 0.0;
};

/// Smallest lambda at which the trivial-line linearization a K - lambda f'(0) M
/// is singular: lambda* = a lambda1 / f'(0) with the discrete lambda1.
/// With a = 0 and (f4) the origin is lambda* = 0.
/// Throws NoPrimaryBifurcationError when f'(0) is not finite and positive.
BifurcationPoint detect_primary_bifurcation(const ProblemParams& params);

/// The problem written with h = lambda f - lambda s; requires the small-s
/// condition, in which case the bifurcation sits at a lambda1.
BifurcationPoint detect_primary_bifurcation(const HForm& h, const ProblemParams& params);

/// Values in (0, lambda_max] where the determinant sign of a K - lambda f'(0) M
/// changes, located by bisection on a uniform scan.
std::vector<double> scan_trivial_line(const ProblemParams& params, double lambda_max,
                                      int samples = 400);

enum class TerminationReason { max_norm_reached, max_steps, fold_limit, failure };

std::string_view to_string(TerminationReason reason);

struct BranchPoint {
  double lambda = 0.0;
  FieldVector u;
  double h1_norm = 0.0;
  double l2_norm = 0.0;
  double sup_norm = 0.0;
  double min_value = 0.0;
  double arc_param = 0.0;
  int newton_iters = 0;
  double residual_norm = 0.0;
  bool positive = false;
};

struct AsymptoteEstimate {
  double lambda_inf = 0.0;
  double slope = 0.0;  // c in lambda = lambda_inf + c / h1^2
  double uncertainty = 0.0;
  int points_used = 0;
  bool reliable = true;
};

struct Branch {
  std::vector<BranchPoint> points;
  BifurcationPoint origin;
  TerminationReason termination = TerminationReason::max_steps;
  std::string detail;
  int folds = 0;
  /// Largest arclength step the controller may take.
  double step_bound = 0.0;
  std::optional<AsymptoteEstimate> asymptote;
};

struct ContinuationSettings {
  double step_ds = 0.1;
  int max_steps = 500;
  double max_norm = 10.0;
  double newton_tol = 1e-10;
  int max_corrector_iters = 12;
  int fold_limit = 4;
  bool require_positive = true;
};

/// Pseudo-arclength continuation in the metric <(u,l),(v,m)> = u^T K v + l m.
/// The first point is u = eps * direction with ||u||_K = 10 step_ds, corrected
/// on the hyperplane orthogonal to the direction. Steps double after three
/// consecutive correctors of at most three iterations and halve on failure,
/// within [step_ds/64, 8 step_ds]; six consecutive halvings end the branch.
Branch continue_branch(const ProblemParams& params, const BifurcationPoint& origin,
                       const ContinuationSettings& settings);

/// Continuation from a converged solution; the initial tangent is oriented so
/// that lambda moves in the sign of lambda_direction.
Branch continue_branch(const ProblemParams& params, const Solution& start,
                       const ContinuationSettings& settings, double lambda_direction = 1.0);

/// Least-squares fit of lambda = lambda_inf + c / h1^2 over the last
/// tail_fraction of the points. The estimate is flagged unreliable when the
/// tail norms are not increasing. Needs at least 10 points.
AsymptoteEstimate estimate_asymptote(const Branch& branch, double tail_fraction = 0.3);
AsymptoteEstimate estimate_asymptote(const std::vector<double>& h1_norms,
                                     const std::vector<double>& lambdas, double tail_fraction);

/// Solution on the branch with ||u||_K = target, by Newton on the residual
/// bordered with u^T K u = target^2, started from the bracketing points.
std::optional<Solution> solve_at_norm(const ProblemParams& params, const Branch& branch,
                                      double target, double tol = 1e-10);

/// Solution on the branch at a prescribed lambda, started from the first pair
/// of points whose lambda values bracket it.
std::optional<Solution> solve_at_lambda(const ProblemParams& params, const Branch& branch,
                                        double lambda, double tol = 1e-10);

struct SweepMember {
  int n = 0;
  double a = 0.0;
  double expected_origin = 0.0;
  double origin = 0.0;
  bool failed = false;
  std::string failure;
  Branch branch;
};

struct MatchedComparison {
  /// Member labels; n = 0 denotes the direct a = 0 run.
  int n_coarse = 0;
  int n_fine = 0;
  std::vector<double> norms;
  std::vector<double> lambda_difference;
  double max_difference = 0.0;
};

struct SweepReport {
  double f0_tilde = 0.0;
  double f_inf = 0.0;
  std::vector<SweepMember> members;
  SweepMember direct;
  std::vector<double> matched_norms;
  std::vector<MatchedComparison> comparisons;  // successive members, then largest n vs direct
  double max_origin_error = 0.0;
  bool origins_match = false;
  bool differences_decreasing = false;
  std::optional<AsymptoteEstimate> limit_asymptote;   // largest-n member
  std::optional<AsymptoteEstimate> direct_asymptote;  // a = 0 run
  /// Positive solution of the a = 0 problem at lambda = probe_lambda, if found.
  double probe_lambda = 1.0;
  std::optional<Solution> probe_solution;
};

struct SweepSettings {
  ContinuationSettings continuation;
  std::vector<double> matched_norms;  // empty: 8 levels spread over (0, max_norm)
  double tail_fraction = 0.3;
  double probe_lambda = 1.0;
  double origin_tol = 1e-4;
};

/// Runs a = 1/n for each n (members may run concurrently) and the a = 0
/// problem itself, all with the same nonlinearity, which must satisfy (f4).
/// A failing member is recorded and the sweep continues.
SweepReport vanishing_a_sweep(const ProblemParams& a0_template, const std::vector<int>& n_list,
                              const SweepSettings& settings);

}  // namespace kirchhoff
