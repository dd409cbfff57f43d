#include "kirchhoff/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "kirchhoff/banded.hpp"
#include "kirchhoff/errors.hpp"
#include "kirchhoff/spectra_linear.hpp"

namespace kirchhoff {

namespace {

struct Tangent {
  Vector u;
  double lambda = 0.0;
};

double metric_norm(const DiscreteOperators& ops, const Vector& u, double lambda) {
  return std::sqrt(ops.energy(u) + lambda * lambda);
}

double residual_target(const ProblemParams& params, const Vector& u, double tol) {
  return residual_threshold(u, params, tol);
}

BranchPoint make_point(const ProblemParams& params, const FieldVector& u, double lambda, int iters,
                       double arc) {
  const FieldNorms norms = field_norms(u, params.operators());
  BranchPoint p;
  p.lambda = lambda;
  p.u = u;
  p.h1_norm = norms.h1;
  p.l2_norm = norms.l2;
  p.sup_norm = norms.sup;
  p.min_value = norms.min;
  p.arc_param = arc;
  p.newton_iters = iters;
  p.residual_norm = residual(u, lambda, params).norm();  // re-evaluated from scratch
  p.positive = is_positive(u);
  return p;
}

/// Unit tangent at (u, lambda) oriented along prev.
Tangent compute_tangent(const ProblemParams& params, const FieldVector& u, double lambda,
                        const Tangent& prev) {
  const DiscreteOperators& ops = params.operators();
  const JacobianSolver jac(u, lambda, params);
  const Vector f_lambda = -nemitsky_load(u, params);
  const Vector row = ops.apply_stiffness(prev.u);
  auto [x, y] = jac.solve_bordered(f_lambda, row, prev.lambda, Vector::Zero(ops.size()), 1.0);
  const double norm = metric_norm(ops, x, y);
  return {x / norm, y / norm};
}

struct Corrected {
  bool ok = false;
  FieldVector u;
  double lambda = 0.0;
  int iters = 0;
  std::string why;
};

/// Bordered Newton on r(u, l) = 0 and <tau, (u, l) - (u_pred, l_pred)> = 0.
Corrected correct(const ProblemParams& params, const FieldVector& u_pred, double l_pred,
                  const Tangent& tau, const ContinuationSettings& settings) {
  const DiscreteOperators& ops = params.operators();
  const Vector row = ops.apply_stiffness(tau.u);
  Corrected out;
  out.u = u_pred;
  out.lambda = l_pred;
  double first_norm = -1.0;
  try {
    for (int it = 0;; ++it) {
      const Vector r = residual(out.u, out.lambda, params);
      const double rnorm = r.norm();
      if (first_norm < 0) first_norm = rnorm;
      const double g = row.dot(out.u.values - u_pred.values) + tau.lambda * (out.lambda - l_pred);
      if (rnorm <= residual_target(params, out.u.values, settings.newton_tol) &&
          std::abs(g) <= 1e-10 * (1.0 + std::abs(tau.lambda * l_pred))) {
        out.ok = true;
        out.iters = it;
        return out;
      }
      if (it == settings.max_corrector_iters) {
        out.why = "corrector iteration cap";
        return out;
      }
      if (!std::isfinite(rnorm) || rnorm > 1e6 * (1.0 + first_norm)) {
        out.why = "corrector diverged";
        return out;
      }
      const JacobianSolver jac(out.u, out.lambda, params);
      const Vector f_lambda = -nemitsky_load(out.u, params);
      auto [du, dl] = jac.solve_bordered(f_lambda, row, tau.lambda, -r, -g);
      out.u.values += du;
      out.lambda += dl;
    }
  } catch (const SingularJacobianError& e) {
    out.why = e.what();
  }
  return out;
}

void trace(const ProblemParams& params, FieldVector u, double lambda, Tangent tangent,
           const ContinuationSettings& settings, Branch& branch) {
  const DiscreteOperators& ops = params.operators();
  const double ds0 = settings.step_ds;
  double ds = ds0;
  int easy = 0;
  int halvings = 0;
  while (true) {
    const BranchPoint& last = branch.points.back();
    if (last.h1_norm >= settings.max_norm) {
      branch.termination = TerminationReason::max_norm_reached;
      return;
    }
    if (static_cast<int>(branch.points.size()) >= settings.max_steps) {
      branch.termination = TerminationReason::max_steps;
      return;
    }
    FieldVector u_pred{u.values + ds * tangent.u, u.mesh_id};
    const double l_pred = lambda + ds * tangent.lambda;
    const Corrected c = correct(params, u_pred, l_pred, tangent, settings);
    if (!c.ok) {
      ds *= 0.5;
      easy = 0;
      if (++halvings > 6 || ds < ds0 / 64) {
        branch.termination = TerminationReason::failure;
        branch.detail = "corrector failed after repeated step halving: " + c.why;
        return;
      }
      continue;
    }
    halvings = 0;
    const double step = metric_norm(ops, c.u.values - u.values, c.lambda - lambda);
    branch.points.push_back(make_point(params, c.u, c.lambda, c.iters, last.arc_param + step));
    if (settings.require_positive && !branch.points.back().positive) {
      branch.termination = TerminationReason::failure;
      branch.detail = "positivity lost at step " + std::to_string(branch.points.size() - 1);
      return;
    }
    Tangent next;
    try {
      next = compute_tangent(params, c.u, c.lambda, tangent);
    } catch (const SingularJacobianError& e) {
      branch.termination = TerminationReason::failure;
      branch.detail = std::string("tangent solve failed: ") + e.what();
      return;
    }
    if (next.lambda * tangent.lambda < 0) ++branch.folds;
    if (branch.folds >= settings.fold_limit) {
      branch.termination = TerminationReason::fold_limit;
      return;
    }
    u = c.u;
    lambda = c.lambda;
    tangent = std::move(next);
    if (c.iters <= 3) {
      if (++easy >= 3) {
        ds = std::min(2 * ds, 8 * ds0);
        easy = 0;
      }
    } else {
      easy = 0;
    }
  }
}

void validate(const ContinuationSettings& settings) {
  if (!(settings.step_ds > 0)) throw InvalidArgumentError("step_ds must be positive");
  if (settings.max_steps < 1) throw InvalidArgumentError("max_steps must be positive");
}

std::pair<std::size_t, double> bracket(const std::vector<double>& values, double target) {
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double lo = std::min(values[i], values[i + 1]);
    const double hi = std::max(values[i], values[i + 1]);
    if (target >= lo && target <= hi) {
      const double span = values[i + 1] - values[i];
      return {i, span != 0 ? (target - values[i]) / span : 0.0};
    }
  }
  return {values.size(), 0.0};
}

}  // namespace

std::string_view to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::max_norm_reached: return "max_norm_reached";
    case TerminationReason::max_steps: return "max_steps";
    case TerminationReason::fold_limit: return "fold_limit";
    case TerminationReason::failure: return "failure";
  }
  return "unknown";
}

BifurcationPoint detect_primary_bifurcation(const ProblemParams& params) {
  const double slope = params.f.linear_coefficient();
  if (!std::isfinite(slope) || !(slope > 0))
    throw NoPrimaryBifurcationError("f'(0) must be finite and positive for a primary bifurcation");
  if (params.a == 0.0 && !params.f.flags().f4)
    throw NoPrimaryBifurcationError("a = 0 needs a nonlinearity satisfying (f4)");
  const EigenPair p1 = principal_eigenpair(params.operators());
  BifurcationPoint bp;
  bp.lambda1 = p1.lambda;
  bp.lambda_star = params.a * p1.lambda / slope;
  bp.direction = p1.phi;
  return bp;
}

BifurcationPoint detect_primary_bifurcation(const HForm& h, const ProblemParams& params) {
  if (!h.small_s_condition)
    throw NoPrimaryBifurcationError("h-form violates h(s)/s -> 0; no bifurcation at a lambda1");
  if (!(params.a > 0)) throw NoPrimaryBifurcationError("h-form bifurcation needs a > 0");
  const EigenPair p1 = principal_eigenpair(params.operators());
  return {params.a * p1.lambda, p1.phi, p1.lambda};
}

std::vector<double> scan_trivial_line(const ProblemParams& params, double lambda_max, int samples) {
  if (!(lambda_max > 0) || samples < 2) throw InvalidArgumentError("scan needs lambda_max > 0");
  const DiscreteOperators& ops = params.operators();
  const double slope = params.f.linear_coefficient();
  const int bw = stiffness_bandwidth(ops.mesh());
  const int n = static_cast<int>(ops.size());
  auto sign_at = [&](double lambda) {
    BandMatrix m(n, bw, bw);
    m.add_sparse(ops.stiffness(), params.a);
    m.add_sparse(ops.mass(), -lambda * slope);
    const BandedLU lu(std::move(m));
    return lu.ok() ? lu.sign_determinant() : 0;
  };
  std::vector<double> roots;
  double prev_l = 0.0;
  int prev_s = sign_at(lambda_max * 1e-9);
  for (int j = 1; j <= samples; ++j) {
    const double l = lambda_max * j / samples;
    const int s = sign_at(l);
    if (s == 0) {
      roots.push_back(l);
    } else if (prev_s != 0 && s != prev_s) {
      double lo = prev_l, hi = l;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const int sm = sign_at(mid);
        if (sm == 0) {
          lo = hi = mid;
          break;
        }
        (sm == prev_s ? lo : hi) = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_l = l;
    if (s != 0) prev_s = s;
  }
  return roots;
}

Branch continue_branch(const ProblemParams& params, const BifurcationPoint& origin,
                       const ContinuationSettings& settings) {
  validate(settings);
  const DiscreteOperators& ops = params.operators();
  require_same_mesh(ops.mesh_id(), origin.direction.mesh_id, "continue_branch");
  Branch branch;
  branch.origin = origin;
  branch.step_bound = 8 * settings.step_ds;
  if (settings.max_norm <= 0) {
    branch.termination = TerminationReason::max_norm_reached;
    return branch;
  }
  const double phi_norm = std::sqrt(ops.energy(origin.direction));
  const Tangent tau0{origin.direction.values / phi_norm, 0.0};
  const FieldVector u_pred{10.0 * settings.step_ds * tau0.u, origin.direction.mesh_id};
  const Corrected first = correct(params, u_pred, origin.lambda_star, tau0, settings);
  if (!first.ok) {
    branch.termination = TerminationReason::failure;
    branch.detail = "could not leave the trivial line: " + first.why;
    return branch;
  }
  const double arc = metric_norm(ops, first.u.values, first.lambda - origin.lambda_star);
  branch.points.push_back(make_point(params, first.u, first.lambda, first.iters, arc));
  if (settings.require_positive && !branch.points.back().positive) {
    branch.termination = TerminationReason::failure;
    branch.detail = "positivity lost at step 0";
    return branch;
  }
  Tangent tangent;
  try {
    tangent = compute_tangent(params, first.u, first.lambda, tau0);
  } catch (const SingularJacobianError& e) {
    branch.termination = TerminationReason::failure;
    branch.detail = std::string("tangent solve failed: ") + e.what();
    return branch;
  }
  trace(params, first.u, first.lambda, std::move(tangent), settings, branch);
  return branch;
}

Branch continue_branch(const ProblemParams& params, const Solution& start,
                       const ContinuationSettings& settings, double lambda_direction) {
  validate(settings);
  const DiscreteOperators& ops = params.operators();
  require_same_mesh(ops.mesh_id(), start.u.mesh_id, "continue_branch");
  Branch branch;
  branch.origin.lambda_star = start.lambda;
  branch.origin.direction = start.u;
  branch.step_bound = 8 * settings.step_ds;
  if (settings.max_norm <= 0) {
    branch.termination = TerminationReason::max_norm_reached;
    return branch;
  }
  branch.points.push_back(make_point(params, start.u, start.lambda, start.newton_iters, 0.0));
  Tangent tangent;
  try {
    tangent = compute_tangent(params, start.u, start.lambda,
                              {Vector::Zero(ops.size()), lambda_direction >= 0 ? 1.0 : -1.0});
  } catch (const SingularJacobianError& e) {
    branch.termination = TerminationReason::failure;
    branch.detail = std::string("tangent solve failed: ") + e.what();
    return branch;
  }
  trace(params, start.u, start.lambda, std::move(tangent), settings, branch);
  return branch;
}

AsymptoteEstimate estimate_asymptote(const std::vector<double>& h1, const std::vector<double>& lambda,
                                     double tail_fraction) {
  if (h1.size() != lambda.size()) throw InvalidArgumentError("asymptote fit: length mismatch");
  if (h1.size() < 10) throw InvalidArgumentError("asymptote fit needs at least 10 points");
  if (!(tail_fraction > 0 && tail_fraction <= 1))
    throw InvalidArgumentError("tail_fraction must lie in (0, 1]");
  const std::size_t count =
      std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(tail_fraction * h1.size())));
  const std::size_t start = h1.size() - std::min(count, h1.size());
  AsymptoteEstimate est;
  est.points_used = static_cast<int>(h1.size() - start);
  for (std::size_t i = start + 1; i < h1.size(); ++i)
    if (!(h1[i] > h1[i - 1])) est.reliable = false;

  // Centred least squares for lambda = lambda_inf + c x, x = 1/h1^2.
  double mx = 0, my = 0;
  for (std::size_t i = start; i < h1.size(); ++i) {
    mx += 1.0 / (h1[i] * h1[i]);
    my += lambda[i];
  }
  mx /= est.points_used;
  my /= est.points_used;
  double sxx = 0, sxy = 0;
  for (std::size_t i = start; i < h1.size(); ++i) {
    const double dx = 1.0 / (h1[i] * h1[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (lambda[i] - my);
  }
  est.slope = sxx > 0 ? sxy / sxx : 0.0;
  est.lambda_inf = my - est.slope * mx;
  double ss = 0;
  for (std::size_t i = start; i < h1.size(); ++i) {
    const double fit = est.lambda_inf + est.slope / (h1[i] * h1[i]);
    ss += (lambda[i] - fit) * (lambda[i] - fit);
  }
  est.uncertainty = std::sqrt(ss / est.points_used);
  return est;
}

AsymptoteEstimate estimate_asymptote(const Branch& branch, double tail_fraction) {
  std::vector<double> h1, lambda;
  for (const BranchPoint& p : branch.points) {
    h1.push_back(p.h1_norm);
    lambda.push_back(p.lambda);
  }
  return estimate_asymptote(h1, lambda, tail_fraction);
}

std::optional<Solution> solve_at_norm(const ProblemParams& params, const Branch& branch,
                                      double target, double tol) {
  std::vector<double> norms;
  for (const BranchPoint& p : branch.points) norms.push_back(p.h1_norm);
  const auto [i, t] = bracket(norms, target);
  if (i >= norms.size()) return std::nullopt;
  const BranchPoint& p = branch.points[i];
  const BranchPoint& q = branch.points[i + 1];
  FieldVector u{(1 - t) * p.u.values + t * q.u.values, p.u.mesh_id};
  double lambda = (1 - t) * p.lambda + t * q.lambda;
  const DiscreteOperators& ops = params.operators();
  try {
    for (int it = 0; it <= 30; ++it) {
      const Vector r = residual(u, lambda, params);
      const Vector ku = ops.apply_stiffness(u.values);
      const double c = u.values.dot(ku) - target * target;
      if (r.norm() <= residual_target(params, u.values, tol) &&
          std::abs(c) <= 1e-12 * target * target)
        return Solution{u, lambda, r.norm(), it, is_positive(u)};
      const JacobianSolver jac(u, lambda, params);
      auto [du, dl] = jac.solve_bordered(-nemitsky_load(u, params), 2.0 * ku, 0.0, -r, -c);
      u.values += du;
      lambda += dl;
      if (!u.values.allFinite() || !std::isfinite(lambda)) return std::nullopt;
    }
  } catch (const SingularJacobianError&) {
  }
  return std::nullopt;
}

std::optional<Solution> solve_at_lambda(const ProblemParams& params, const Branch& branch,
                                        double lambda, double tol) {
  std::vector<double> lambdas;
  for (const BranchPoint& p : branch.points) lambdas.push_back(p.lambda);
  const auto [i, t] = bracket(lambdas, lambda);
  if (i >= lambdas.size()) return std::nullopt;
  const FieldVector u0{(1 - t) * branch.points[i].u.values + t * branch.points[i + 1].u.values,
                       branch.points[i].u.mesh_id};
  try {
    return newton_solve(u0, lambda, params, tol, 50);
  } catch (const Error&) {
    return std::nullopt;
  }
}

SweepReport vanishing_a_sweep(const ProblemParams& a0_template, const std::vector<int>& n_list,
                              const SweepSettings& settings) {
  if (a0_template.a != 0.0) throw InvalidArgumentError("sweep template must have a = 0");
  if (!a0_template.f.flags().f4)
    throw InvalidArgumentError("sweep nonlinearity must satisfy (f4)");
  if (n_list.empty()) throw InvalidArgumentError("sweep needs at least one n");
  for (std::size_t k = 0; k < n_list.size(); ++k)
    if (n_list[k] < 1 || (k > 0 && n_list[k] <= n_list[k - 1]))
      throw InvalidArgumentError("n_list must be ascending positive integers");

  SweepReport report;
  report.f0_tilde = a0_template.f.declared().f0_tilde;
  report.f_inf = a0_template.f.declared().f_inf;
  report.probe_lambda = settings.probe_lambda;

  const int tasks = static_cast<int>(n_list.size()) + 1;
  std::vector<SweepMember> runs(static_cast<std::size_t>(tasks));
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < tasks; ++k) {
    SweepMember& m = runs[k];
    const bool direct = k == tasks - 1;
    m.n = direct ? 0 : n_list[k];
    m.a = direct ? 0.0 : 1.0 / m.n;
    m.expected_origin = direct ? 0.0 : 1.0 / (report.f0_tilde * m.n);
    ProblemParams p = a0_template;
    p.a = m.a;
    try {
      const BifurcationPoint bp = detect_primary_bifurcation(p);
      m.origin = bp.lambda_star;
      m.branch = continue_branch(p, bp, settings.continuation);
      if (m.branch.termination == TerminationReason::failure) {
        m.failed = true;
        m.failure = m.branch.detail;
      }
      if (m.branch.points.size() >= 10) m.branch.asymptote = estimate_asymptote(m.branch, settings.tail_fraction);
    } catch (const Error& e) {
      m.failed = true;
      m.failure = e.what();
    }
  }
  report.direct = std::move(runs.back());
  runs.pop_back();
  report.members = std::move(runs);

  report.origins_match = true;
  for (const SweepMember& m : report.members) {
    const double err = std::abs(m.origin - m.expected_origin);
    report.max_origin_error = std::max(report.max_origin_error, err);
    if (m.failed || err > settings.origin_tol) report.origins_match = false;
  }

  // Matched norm levels inside the range every branch covers.
  double common_hi = std::numeric_limits<double>::infinity();
  double common_lo = 0.0;
  auto cover = [&](const SweepMember& m) {
    if (m.branch.points.empty()) {
      common_hi = 0.0;
      return;
    }
    common_lo = std::max(common_lo, m.branch.points.front().h1_norm);
    common_hi = std::min(common_hi, m.branch.points.back().h1_norm);
  };
  for (const SweepMember& m : report.members) cover(m);
  cover(report.direct);
  report.matched_norms = settings.matched_norms;
  if (report.matched_norms.empty() && common_hi > common_lo) {
    const double lo = std::max(common_lo * 1.5, 0.05 * common_hi);
    const double hi = 0.9 * common_hi;
    for (int j = 0; j < 8; ++j) report.matched_norms.push_back(lo * std::pow(hi / lo, j / 7.0));
  }

  std::vector<const SweepMember*> chain;
  for (const SweepMember& m : report.members) chain.push_back(&m);
  chain.push_back(&report.direct);
  std::vector<std::vector<std::optional<double>>> matched(chain.size());
  for (std::size_t k = 0; k < chain.size(); ++k) {
    ProblemParams p = a0_template;
    p.a = chain[k]->a;
    for (double level : report.matched_norms) {
      const auto s = chain[k]->failed ? std::nullopt : solve_at_norm(p, chain[k]->branch, level);
      matched[k].push_back(s ? std::optional<double>(s->lambda) : std::nullopt);
    }
  }
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    MatchedComparison cmp;
    cmp.n_coarse = chain[k]->n;
    cmp.n_fine = chain[k + 1]->n;
    for (std::size_t j = 0; j < report.matched_norms.size(); ++j) {
      if (!matched[k][j] || !matched[k + 1][j]) continue;
      cmp.norms.push_back(report.matched_norms[j]);
      cmp.lambda_difference.push_back(std::abs(*matched[k][j] - *matched[k + 1][j]));
    }
    cmp.max_difference = cmp.lambda_difference.empty()
                             ? std::numeric_limits<double>::quiet_NaN()
                             : *std::max_element(cmp.lambda_difference.begin(), cmp.lambda_difference.end());
    report.comparisons.push_back(std::move(cmp));
  }
  // Successive members only; the last comparison is largest n against a = 0.
  const std::size_t member_cmps = report.members.size() - 1;
  report.differences_decreasing = member_cmps >= 2;
  for (std::size_t k = 0; k + 1 < member_cmps; ++k)
    if (!(report.comparisons[k + 1].max_difference < report.comparisons[k].max_difference))
      report.differences_decreasing = false;

  if (!report.members.empty()) report.limit_asymptote = report.members.back().branch.asymptote;
  report.direct_asymptote = report.direct.branch.asymptote;
  if (!report.direct.failed) {
    ProblemParams p = a0_template;
    report.probe_solution = solve_at_lambda(p, report.direct.branch, settings.probe_lambda);
  }
  return report;
}

}  // namespace kirchhoff
