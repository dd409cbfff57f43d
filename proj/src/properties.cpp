#include "kirchhoff/properties.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "kirchhoff/continuation.hpp"
#include "kirchhoff/errors.hpp"
#include "kirchhoff/spectra_linear.hpp"
#include "kirchhoff/spectra_nonlocal.hpp"

namespace kirchhoff {

namespace {

Vector uniform(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

double parse_double(const std::string& text) {
  double v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InvalidArgumentError("not a number in branch CSV: " + text);
  return v;
}

PropertyResult start(const char* name, int samples, double limit) {
  PropertyResult r;
  r.name = name;
  r.samples = samples;
  r.limit = limit;
  return r;
}

}  // namespace

PropertyResult picone_suite(const DiscreteOperators& ops, int pairs, std::uint64_t seed) {
  // worst: most negative defect measured in units of the allowed slack
  PropertyResult r = start("picone", pairs, 1.0);
  std::mt19937_64 rng(seed);
  const Vector phi = principal_eigenpair(ops).phi.values;
  for (int k = 0; k < pairs; ++k) {
    const FieldVector u = ops.field(uniform(rng, ops.size(), -1, 1));
    Vector v = uniform(rng, ops.size(), 0.05, 1);
    if (k % 2) v = v.cwiseProduct(phi).array() + 1e-3;  // vanishing toward the boundary
    const FieldVector fv = ops.field(v);
    const double defect = picone_defect(u, fv, ops);
    r.worst = std::max(r.worst, -defect / picone_slack(u, fv, ops));
  }
  r.pass = r.worst <= r.limit;
  return r;
}

PropertyResult monotonicity_suite(const ProblemParams& params, int pairs, std::uint64_t seed) {
  // worst: largest shortfall (stated_bound - pairing) / scale
  PropertyResult r = start("monotonicity", pairs, 1e-12);
  r.worst = -std::numeric_limits<double>::infinity();
  const DiscreteOperators& ops = params.operators();
  std::mt19937_64 rng(seed);
  for (int k = 0; k < pairs; ++k) {
    const FieldVector u = ops.field(uniform(rng, ops.size(), -1, 1));
    const FieldVector v = ops.field(uniform(rng, ops.size(), -1, 1));
    const MonotonicityReport m = monotonicity_report(u, v, params);
    r.worst = std::max(r.worst, (m.stated_bound - m.pairing) / m.scale);
  }
  r.pass = r.worst <= r.limit;
  return r;
}

PropertyResult solve_s_suite(const ProblemParams& params, int loads, std::uint64_t seed) {
  PropertyResult r = start("solve_S", loads, 1e-10);
  const DiscreteOperators& ops = params.operators();
  std::mt19937_64 rng(seed);
  double worst_res = 0, worst_hom = 0;
  for (int k = 0; k < loads; ++k) {
    const FieldVector g = ops.field(uniform(rng, ops.size(), -1, 1));
    const FieldVector u = solve_S(g, params);
    const Vector ku = ops.apply_stiffness(u.values);
    const Vector mg = ops.apply_mass(g.values);
    worst_res = std::max(worst_res, (params.b * u.values.dot(ku) * ku - mg).norm() / mg.norm());
    const FieldVector u8 = solve_S(8.0 * g, params);
    worst_hom = std::max(worst_hom, (u8.values - 2.0 * u.values).norm() / (2.0 * u.values.norm()));
  }
  r.worst = std::max(worst_res, worst_hom);
  std::ostringstream d;
  d << "residual " << worst_res << ", homogeneity " << worst_hom;
  r.detail = d.str();
  r.pass = r.worst <= r.limit;
  return r;
}

PropertyResult jacobian_fd_suite(const ProblemParams& params, int samples, std::uint64_t seed) {
  PropertyResult r = start("jacobian_fd", samples, 1e-6);
  const DiscreteOperators& ops = params.operators();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lam(0.1, 5.0);
  for (int k = 0; k < samples; ++k) {
    const FieldVector u = ops.field(uniform(rng, ops.size(), -1, 1));
    const Vector v = uniform(rng, ops.size(), -1, 1);
    const double lambda = lam(rng);
    const double h = 1e-5 * std::max(1.0, u.values.norm()) / v.norm();
    const Vector fd = (residual(ops.field(u.values + h * v), lambda, params) -
                       residual(ops.field(u.values - h * v), lambda, params)) /
                      (2 * h);
    const Vector jv = JacobianSolver(u, lambda, params).apply(v);
    r.worst = std::max(r.worst, (jv - fd).norm() / jv.norm());
  }
  r.pass = r.worst <= r.limit;
  return r;
}

PropertyResult sherman_morrison_suite(const ProblemParams& params, int samples,
                                      std::uint64_t seed) {
  PropertyResult r = start("sherman_morrison", samples, 1e-10);
  const DiscreteOperators& ops = params.operators();
  if (ops.mesh().node_count() > 64)
    throw InvalidArgumentError("sherman_morrison_suite needs a mesh of at most 64 nodes");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lam(0.1, 5.0);
  for (int k = 0; k < samples; ++k) {
    const FieldVector u = ops.field(uniform(rng, ops.size(), -1, 1));
    const double lambda = lam(rng);
    const Vector rhs = uniform(rng, ops.size(), -1, 1);
    const JacobianSolver jac(u, lambda, params);
    Eigen::MatrixXd dense(ops.size(), ops.size());
    for (Eigen::Index j = 0; j < ops.size(); ++j) dense.col(j) = jac.apply(Vector::Unit(ops.size(), j));
    const Vector ref = dense.fullPivLu().solve(rhs);
    const Vector x = jac.solve(rhs);
    r.worst = std::max(r.worst, (x - ref).norm() / ref.norm());
  }
  r.pass = r.worst <= r.limit;
  return r;
}

PropertyResult trivial_line_suite(const ProblemParams& params) {
  PropertyResult r = start("trivial_line", 0, 1e-8);
  const BifurcationPoint bp = detect_primary_bifurcation(params);
  if (!(bp.lambda_star > 0)) {
    r.pass = true;
    r.detail = "a = 0: the trivial line has no interior singular point";
    return r;
  }
  const std::vector<double> roots = scan_trivial_line(params, 3 * bp.lambda_star);
  const double slope = params.f.linear_coefficient();
  const auto eigs = dirichlet_eigs(params.operators(), static_cast<int>(roots.size()) + 1);
  r.samples = static_cast<int>(roots.size());
  if (roots.empty() || std::abs(roots[0] - bp.lambda_star) > 1e-8 * bp.lambda_star) {
    r.worst = 1.0;
    r.detail = "first sign change is not at lambda*";
  }
  for (double root : roots) {
    double best = 1.0;
    for (const EigenPair& e : eigs) {
      const double expected = params.a * e.lambda / slope;
      best = std::min(best, std::abs(root - expected) / expected);
    }
    r.worst = std::max(r.worst, best);
  }
  r.pass = r.worst <= r.limit;
  return r;
}

PropertyResult branch_law_column_check(const std::string& csv, double lambda1, double a, double b,
                                       double tol) {
  PropertyResult r = start("branch_law", 0, tol);
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgumentError("branch CSV is empty");
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  const auto col = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidArgumentError(std::string("branch CSV lacks ") + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_lambda = col("lambda"), c_h1 = col("h1_norm");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) throw InvalidArgumentError("ragged branch CSV row");
    const double lambda = parse_double(cells[c_lambda]);
    const double h1 = parse_double(cells[c_h1]);
    r.worst = std::max(r.worst, std::abs(lambda - lambda1 * (a + b * h1 * h1)) / lambda);
    ++r.samples;
  }
  r.pass = r.samples > 0 && r.worst <= tol;
  return r;
}

}  // namespace kirchhoff
