#include "kirchhoff/spectra_nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "kirchhoff/errors.hpp"
#include "kirchhoff/kernels.hpp"

namespace kirchhoff {

namespace {

std::string io_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Vector cube_load(const DiscreteOperators& ops, const Vector& u) {
  Vector q;
  kernels::parallel::galerkin_load(ops, u, [](double s) { return s * s * s; }, q);
  return q;
}

double quartic(const DiscreteOperators& ops, const Vector& u) {
  return kernels::parallel::integrate_power(ops, u, 4);
}

void normalize_quartic(const DiscreteOperators& ops, Vector& u) {
  u /= std::pow(quartic(ops, u), 0.25);
}

Vector odd_part(const DiscreteOperators& ops, const Vector& u) {
  return 0.5 * (u - reflect_x(ops, u));
}

NonlocalEigenPair run_minimization(const DiscreteOperators& ops, Vector u, double tol,
                                   int max_iters, std::uint64_t seed_id, bool odd) {
  if (!(tol > 0)) throw InvalidArgumentError("minimization tolerance must be positive");
  if (max_iters < 1) throw InvalidArgumentError("iteration cap must be positive");
  if (odd) u = odd_part(ops, u);
  if (!(u.lpNorm<Eigen::Infinity>() > 0) || !u.allFinite())
    throw InvalidSeedError("minimization seed is zero or not finite");
  normalize_quartic(ops, u);

  // Same cancellation floor as the linear eigen residual.
  const double knorm = infinity_norm(ops.stiffness());
  NonlocalEigenPair out;
  out.converged_from = seed_id;
  double residual = std::numeric_limits<double>::infinity();
  double mu = 0.0;
  for (int it = 0;; ++it) {
    const Vector ku = ops.apply_stiffness(u);
    const Vector q = cube_load(ops, u);
    const double energy = u.dot(ku);
    mu = energy * energy;
    residual = (energy * ku - mu * q).norm() / (energy * ku).norm();
    out.iterations = it;
    if (residual <= std::max(tol, 4 * std::numeric_limits<double>::epsilon() * knorm * u.norm() /
                                      ku.norm())) {
      out.converged = true;
      break;
    }
    if (it == max_iters) break;

    Vector w = ops.solve_stiffness(q);
    if (odd) w = odd_part(ops, w);
    const Vector direction = w / w.dot(q);
    double theta = 1.0;
    bool accepted = false;
    while (theta > 1e-12) {
      Vector candidate = (1.0 - theta) * u + theta * direction;
      normalize_quartic(ops, candidate);
      const double e = ops.energy(candidate);
      if (e * e <= mu * (1.0 + 1e-14)) {
        u = std::move(candidate);
        accepted = true;
        break;
      }
      theta *= 0.5;
    }
    if (!accepted) {
      // Near the minimizer the quotient no longer resolves descent in double
      // precision; keep the full step while it still lowers the residual.
      Vector candidate = direction;
      normalize_quartic(ops, candidate);
      const Vector kc = ops.apply_stiffness(candidate);
      const double ec = candidate.dot(kc);
      const double rc = (ec * kc - ec * ec * cube_load(ops, candidate)).norm() / (ec * kc).norm();
      if (!(rc < residual)) break;
      u = std::move(candidate);
    }
  }
  if (!out.converged)
    throw ConvergenceError("constrained minimization stopped at residual " +
                               io_sci(residual) + " after " +
                               std::to_string(out.iterations) + " iterations",
                           residual, u);
  out.mu = mu;
  out.residual = residual;
  out.psi = ops.field(std::move(u));
  return out;
}

}  // namespace

double nonlocal_quotient(const DiscreteOperators& ops, const FieldVector& u) {
  require_same_mesh(ops.mesh_id(), u.mesh_id, "nonlocal_quotient");
  const double e = ops.energy(u);
  return e * e / quartic(ops, u.values);
}

double nonlocal_residual(const DiscreteOperators& ops, const FieldVector& u, double mu) {
  require_same_mesh(ops.mesh_id(), u.mesh_id, "nonlocal_residual");
  const Vector ku = ops.apply_stiffness(u.values);
  const double e = u.values.dot(ku);
  return (e * ku - mu * cube_load(ops, u.values)).norm() / (e * ku).norm();
}

NonlocalEigenPair minimize_mu1(const DiscreteOperators& ops, const FieldVector& seed, double tol,
                               int max_iters, std::uint64_t seed_id) {
  require_same_mesh(ops.mesh_id(), seed.mesh_id, "minimize_mu1");
  return run_minimization(ops, seed.values, tol, max_iters, seed_id, false);
}

Vector reflect_x(const DiscreteOperators& ops, const Vector& u) {
  const Mesh& mesh = ops.mesh();
  const int nx = mesh.resolution()[0];
  Vector out(u.size());
  for (int d = 0; d < mesh.interior_count(); ++d) {
    const int node = mesh.node_of_dof(d);
    const int i = node % (nx + 1);
    const int mirror = node - i + (nx - i);
    out[mesh.dof(mirror)] = u[d];
  }
  return out;
}

NonlocalEigenPair estimate_mu2(const DiscreteOperators& ops, double tol, int max_iters) {
  const Mesh& mesh = ops.mesh();
  const double x0 = mesh.bounds()[0].lower;
  const double x1 = mesh.bounds()[0].upper;
  const double mid = 0.5 * (x0 + x1);
  const bool two_d = mesh.dimension() == 2;
  const double y0 = two_d ? mesh.bounds()[1].lower : 0.0;
  const double y1 = two_d ? mesh.bounds()[1].upper : 0.0;
  const FieldVector seed = ops.interpolate([&](double x, double y) {
    double v = (x - mid) * (x - x0) * (x1 - x);
    if (two_d) v *= (y - y0) * (y1 - y);
    return v;
  });
  const Vector odd = odd_part(ops, seed.values);
  if (!(odd.lpNorm<Eigen::Infinity>() > 0))
    throw UnsupportedDomainError("mesh carries no nonzero field odd about the midpoint");
  return run_minimization(ops, odd, tol, max_iters, 0, true);
}

NodalDecomposition nodal_domains(const FieldVector& u, const DiscreteOperators& ops,
                                 double zero_band) {
  require_same_mesh(ops.mesh_id(), u.mesh_id, "nodal_domains");
  const Mesh& mesh = ops.mesh();
  const std::vector<double> vals = ops.nodal_values(u);
  const double peak = u.values.size() ? u.values.cwiseAbs().maxCoeff() : 0.0;
  const double band = zero_band < 0 ? 1e-8 * peak : zero_band;
  NodalDecomposition out;
  if (peak <= band) return out;

  const int nn = mesh.node_count();
  std::vector<int> sign(static_cast<std::size_t>(nn), 0);
  for (int n = 0; n < nn; ++n) sign[n] = vals[n] > band ? 1 : (vals[n] < -band ? -1 : 0);

  std::vector<int> parent(static_cast<std::size_t>(nn));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element(e);
    for (std::size_t a = 0; a < nodes.size(); ++a)
      for (std::size_t b = a + 1; b < nodes.size(); ++b)
        if (sign[nodes[a]] != 0 && sign[nodes[a]] == sign[nodes[b]]) {
          const int ra = find(nodes[a]);
          const int rb = find(nodes[b]);
          if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
  }

  std::vector<int> component(static_cast<std::size_t>(nn), -1);
  std::vector<int> root_index(static_cast<std::size_t>(nn), -1);
  for (int n = 0; n < nn; ++n) {
    if (sign[n] == 0) continue;
    const int r = find(n);
    if (root_index[r] < 0) {
      root_index[r] = static_cast<int>(out.components.size());
      out.components.emplace_back();
      out.sign.push_back(sign[n]);
    }
    component[n] = root_index[r];
    out.components[root_index[r]].push_back(n);
  }
  out.measures.assign(out.components.size(), 0.0);

  if (mesh.dimension() == 1) {
    for (int e = 0; e < mesh.element_count(); ++e) {
      const auto nodes = mesh.element(e);
      const int a = nodes[0];
      const int b = nodes[1];
      const double h = mesh.element_measure(e);
      if (sign[a] != 0 && sign[b] == -sign[a]) {
        const double t = vals[a] / (vals[a] - vals[b]);
        out.measures[component[a]] += h * t;
        out.measures[component[b]] += h * (1.0 - t);
      } else if (sign[a] != 0) {
        out.measures[component[a]] += h;
      } else if (sign[b] != 0) {
        out.measures[component[b]] += h;
      }
    }
    return out;
  }

  std::vector<int> owner(static_cast<std::size_t>(mesh.element_count()), -1);
  for (int e = 0; e < mesh.element_count(); ++e) {
    int best = -1;
    for (int n : mesh.element(e))
      if (sign[n] != 0 && (best < 0 || std::abs(vals[n]) > std::abs(vals[best]))) best = n;
    if (best < 0) continue;
    owner[e] = component[best];
    out.measures[owner[e]] += mesh.element_measure(e);
  }
  // A component whose every element is owned by a stronger neighbour receives
  // a 1/npe share of each element touching it.
  const int npe = mesh.nodes_per_element();
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (out.measures[c] > 0) continue;
    for (int e = 0; e < mesh.element_count(); ++e) {
      for (int n : mesh.element(e)) {
        if (component[n] != static_cast<int>(c)) continue;
        const double share = mesh.element_measure(e) / npe;
        out.measures[c] += share;
        out.measures[owner[e]] -= share;
      }
    }
  }
  return out;
}

double picone_defect(const FieldVector& u, const FieldVector& v, const DiscreteOperators& ops) {
  require_same_mesh(ops.mesh_id(), u.mesh_id, "picone_defect");
  require_same_mesh(ops.mesh_id(), v.mesh_id, "picone_defect");
  if (!(v.values.size() > 0 && v.values.minCoeff() > 0))
    throw PositivityError("picone_defect needs v > 0 at every interior node");
  const ElementTables& t = ops.tables();
  const Mesh& mesh = ops.mesh();
  const int npe = t.nodes_per_element;
  double total = 0.0;
  std::array<double, 4> lu{};
  std::array<double, 4> lv{};
  for (int e = 0; e < mesh.element_count(); ++e) {
    kernels::detail::gather_element(t, u.values, e, lu);
    kernels::detail::gather_element(t, v.values, e, lv);
    std::array<double, 2> gu{};
    std::array<double, 2> gv{};
    double su = 0.0;
    double sv = 0.0;
    for (int a = 0; a < npe; ++a) {
      for (int k = 0; k < 2; ++k) {
        gu[k] += lu[a] * t.centre_gradient[a][k];
        gv[k] += lv[a] * t.centre_gradient[a][k];
      }
      su += lu[a];
      sv += lv[a];
    }
    const double r = su / sv;
    const double guu = gu[0] * gu[0] + gu[1] * gu[1];
    const double gvv = gv[0] * gv[0] + gv[1] * gv[1];
    const double guv = gu[0] * gv[0] + gu[1] * gv[1];
    total += mesh.element_measure(e) * (guu + r * r * gvv - 2.0 * r * guv);
  }
  return total;
}

double picone_slack(const FieldVector& u, const FieldVector& v, const DiscreteOperators& ops) {
  return 1e-10 * (ops.energy(u) + ops.energy(v));
}

GapReport isolation_probe(const DiscreteOperators& ops, const NonlocalEigenPair& mu1_pair,
                          const NonlocalEigenPair& mu2_pair, const IsolationOptions& options) {
  if (!mu1_pair.converged || !mu2_pair.converged)
    throw InvalidArgumentError("isolation_probe needs converged eigenpairs");
  require_same_mesh(ops.mesh_id(), mu1_pair.psi.mesh_id, "isolation_probe");
  require_same_mesh(ops.mesh_id(), mu2_pair.psi.mesh_id, "isolation_probe");
  if (mu2_pair.mu < mu1_pair.mu)
    throw InconsistentSpectrumError("second eigenvalue estimate lies below mu1");

  GapReport report;
  report.mu1 = mu1_pair.mu;
  report.mu2 = mu2_pair.mu;
  report.gap = mu2_pair.mu - mu1_pair.mu;

  if (options.refine) {
    const Mesh& mesh = ops.mesh();
    std::vector<int> fine = mesh.resolution();
    for (int& r : fine) r *= 2;
    const DiscreteOperators fine_ops =
        assemble_operators(build_mesh(mesh.kind(), mesh.bounds(), fine));
    const FieldVector bump = fine_ops.interpolate([&](double x, double y) {
      double v = (x - mesh.bounds()[0].lower) * (mesh.bounds()[0].upper - x);
      if (mesh.dimension() == 2) v *= (y - mesh.bounds()[1].lower) * (mesh.bounds()[1].upper - y);
      return v;
    });
    report.refined_mu1 = minimize_mu1(fine_ops, bump, options.tol, options.max_iters).mu;
    report.refined_mu2 = estimate_mu2(fine_ops, options.tol, options.max_iters).mu;
    report.refined_gap = report.refined_mu2 - report.refined_mu1;
    report.relative_change = std::abs(report.refined_gap - report.gap) / report.gap;
    report.refined = true;
  }

  std::mt19937_64 rng(options.rng_seed);
  std::uniform_real_distribution<double> positive(0.1, 1.0);
  std::uniform_real_distribution<double> signed_dist(-1.0, 1.0);
  const auto n = ops.size();
  Vector reference = mu1_pair.psi.values;
  if (reference.sum() < 0) reference = -reference;
  const int total = options.positive_seeds + options.sign_changing_seeds;
  for (int k = 0; k < total; ++k) {
    const bool is_positive = k < options.positive_seeds;
    Vector seed(n);
    for (Eigen::Index i = 0; i < n; ++i) seed[i] = is_positive ? positive(rng) : signed_dist(rng);
    SeedRun run;
    run.seed_id = static_cast<std::uint64_t>(k) + 1;
    run.positive_seed = is_positive;
    try {
      const NonlocalEigenPair pair =
          minimize_mu1(ops, ops.field(seed), options.tol, options.max_iters, run.seed_id);
      run.converged = true;
      run.mu = pair.mu;
      run.iterations = pair.iterations;
      if (is_positive) {
        report.max_positive_mu_deviation =
            std::max(report.max_positive_mu_deviation, std::abs(pair.mu - report.mu1) / report.mu1);
        const Vector diff = pair.psi.values.cwiseAbs() - reference.cwiseAbs();
        report.max_positive_psi_distance =
            std::max(report.max_positive_psi_distance, std::sqrt(ops.mass_inner(diff, diff)));
      }
    } catch (const ConvergenceError& err) {
      run.converged = false;
      run.mu = std::numeric_limits<double>::quiet_NaN();
      run.iterations = options.max_iters;
    }
    report.runs.push_back(run);
  }

  std::vector<double> window;
  for (const SeedRun& run : report.runs)
    if (run.converged && run.mu >= report.mu1 * (1 - 1e-6) && run.mu <= report.mu1 + report.gap / 2)
      window.push_back(run.mu);
  std::sort(window.begin(), window.end());
  for (double m : window)
    if (report.window_values.empty() || m > report.window_values.back() * (1 + 1e-6))
      report.window_values.push_back(m);
  report.only_mu1_in_window = true;
  for (double m : report.window_values)
    if (std::abs(m - report.mu1) > 1e-6 * report.mu1) report.only_mu1_in_window = false;
  return report;
}

}  // namespace kirchhoff
