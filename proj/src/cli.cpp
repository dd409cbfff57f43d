#include "kirchhoff/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "kirchhoff/continuation.hpp"
#include "kirchhoff/errors.hpp"
#include "kirchhoff/io.hpp"
#include "kirchhoff/properties.hpp"
#include "kirchhoff/spectra_linear.hpp"
#include "kirchhoff/spectra_nonlocal.hpp"

namespace kirchhoff::cli {

namespace fs = std::filesystem;

namespace {

Mesh mesh_from_config(const ExperimentConfig& c) {
  std::vector<AxisBounds> bounds;
  for (const auto& b : c.domain.bounds) bounds.push_back({b[0], b[1]});
  return build_mesh(domain_kind_from_string(c.domain.kind), std::move(bounds), c.domain.resolution);
}

ContinuationSettings continuation_settings(const ExperimentConfig& c) {
  ContinuationSettings s;
  s.step_ds = c.continuation.step_ds;
  s.max_steps = c.continuation.max_steps;
  s.max_norm = c.continuation.max_norm;
  s.newton_tol = c.solver.newton_tol;
  s.max_corrector_iters = c.solver.max_iters;
  return s;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void dump_field(const fs::path& dir, const std::string& name, const FieldVector& u,
                const DiscreteOperators& ops) {
  io::write_atomic(dir / "fields" / (name + ".csv"), io::field_csv(u, ops));
}

int eig_linear(const ExperimentConfig& c, std::ostream& out) {
  const auto ops = assemble_operators(mesh_from_config(c));
  const int count = std::min<int>(4, static_cast<int>(ops.size()));
  LinearEigenOptions opts;
  opts.tol = std::min(1e-10, c.solver.newton_tol);
  const auto pairs = dirichlet_eigs(ops, count, opts);
  const fs::path dir = c.outputs.directory;
  io::write_atomic(dir / "eigenpairs.csv", io::eigenpairs_csv(pairs));
  if (c.outputs.dump_fields)
    for (const EigenPair& p : pairs) dump_field(dir, "phi_" + std::to_string(p.index), p.phi, ops);
  out << "lambda1 = " << io::format_double(pairs.front().lambda) << "\n";
  return ok;
}

int eig_nonlocal(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const auto ops = assemble_operators(mesh_from_config(c));
  const fs::path dir = c.outputs.directory;
  const NonlocalEigenPair mu1 = minimize_mu1(ops, ops.field(Vector::Ones(ops.size())), 1e-11);
  std::vector<NonlocalEigenPair> pairs{mu1};
  std::optional<GapReport> gap;
  try {
    const NonlocalEigenPair mu2 = estimate_mu2(ops, 1e-11);
    pairs.push_back(mu2);
    IsolationOptions opts;
    opts.rng_seed = c.seed;
    gap = isolation_probe(ops, mu1, mu2, opts);
  } catch (const UnsupportedDomainError& e) {
    err << "gap report skipped: " << e.what() << "\n";
  }
  io::write_atomic(dir / "nonlocal.csv", io::nonlocal_csv(pairs));
  if (gap) io::write_atomic(dir / "gap_report.json", io::gap_report_to_json(*gap).dump(2) + "\n");
  if (c.outputs.dump_fields)
    for (std::size_t k = 0; k < pairs.size(); ++k)
      dump_field(dir, "psi_" + std::to_string(k + 1), pairs[k].psi, ops);
  out << "mu1 = " << io::format_double(mu1.mu) << "\n";
  if (gap) out << "mu2 <= " << io::format_double(gap->mu2) << "\n";
  return ok;
}

int branch(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const ProblemParams params = problem_from_config(c);
  const BifurcationPoint bp = detect_primary_bifurcation(params);
  Branch br = continue_branch(params, bp, continuation_settings(c));
  if (br.points.size() >= 10) br.asymptote = estimate_asymptote(br);
  const fs::path dir = c.outputs.directory;
  io::write_atomic(dir / "branch.csv", io::branch_csv(br));
  io::write_atomic(dir / "asymptote.json", io::asymptote_to_json(br).dump(2) + "\n");
  if (c.outputs.dump_fields)
    for (std::size_t k = 0; k < br.points.size(); ++k) {
      std::ostringstream name;
      name << "point_" << std::setw(5) << std::setfill('0') << k;
      dump_field(dir, name.str(), br.points[k].u, params.operators());
    }
  out << "origin = " << io::format_double(bp.lambda_star) << ", points = " << br.points.size()
      << ", termination = " << to_string(br.termination) << "\n";
  if (br.asymptote) out << "lambda_inf ~ " << io::format_double(br.asymptote->lambda_inf) << "\n";
  if (br.termination == TerminationReason::failure) {
    err << "branch failed: " << br.detail << "\n";
    return failure;
  }
  return ok;
}

int sweep(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  if (c.problem.a != 0.0) throw ConfigError("sweep-a needs problem.a = 0");
  const ProblemParams params = problem_from_config(c);
  SweepSettings s;
  s.continuation = continuation_settings(c);
  s.probe_lambda = c.sweep.probe_lambda;
  SweepReport report = vanishing_a_sweep(params, c.sweep.n_list, s);
  const fs::path dir = c.outputs.directory;
  for (const SweepMember& m : report.members)
    io::write_atomic(dir / ("branch_n" + std::to_string(m.n) + ".csv"), io::branch_csv(m.branch));
  io::write_atomic(dir / "branch_direct.csv", io::branch_csv(report.direct.branch));
  io::write_atomic(dir / "family_report.json", io::sweep_report_to_json(report).dump(2) + "\n");
  bool good = report.origins_match && report.differences_decreasing && !report.direct.failed;
  for (const SweepMember& m : report.members)
    if (m.failed) {
      err << "member n = " << m.n << " failed: " << m.failure << "\n";
      good = false;
    }
  if (report.direct.failed) err << "direct a = 0 run failed: " << report.direct.failure << "\n";
  out << "max origin error = " << io::format_double(report.max_origin_error)
      << ", differences decreasing = " << (report.differences_decreasing ? "yes" : "no") << "\n";
  if (report.limit_asymptote)
    out << "limit asymptote ~ " << io::format_double(report.limit_asymptote->lambda_inf) << "\n";
  return good ? ok : failure;
}

int properties(const ExperimentConfig& c, std::ostream& out) {
  const ProblemParams params = problem_from_config(c);
  const DiscreteOperators& ops = params.operators();
  const std::uint64_t seed = c.seed;
  std::vector<PropertyResult> results;
  results.push_back(picone_suite(ops, 50, seed));
  results.push_back(monotonicity_suite(params, 100, seed + 1));
  results.push_back(solve_s_suite(params, 20, seed + 2));
  results.push_back(jacobian_fd_suite(params, 20, seed + 3));

  // Dense comparison on a mesh of the same domain with at most 64 nodes.
  ExperimentConfig small = c;
  for (int& r : small.domain.resolution) r = std::min(r, c.domain.kind == "interval" ? 63 : 7);
  const ProblemParams small_params = problem_from_config(small);
  results.push_back(sherman_morrison_suite(small_params, 20, seed + 4));
  results.push_back(trivial_line_suite(params));

  const fs::path csv = fs::path(c.outputs.directory) / "branch.csv";
  if (params.f.kind() == NonlinearityKind::pure_linear && fs::exists(csv)) {
    const double lambda1 = principal_eigenpair(ops, 1e-12).lambda;
    results.push_back(branch_law_column_check(read_file(csv), lambda1, c.problem.a, c.problem.b));
  }

  bool all = true;
  out << std::left << std::setw(18) << "property" << std::setw(8) << "result" << std::setw(9)
      << "samples" << std::setw(26) << "worst" << "limit\n";
  for (const PropertyResult& r : results) {
    all = all && r.pass;
    out << std::setw(18) << r.name << std::setw(8) << (r.pass ? "pass" : "FAIL") << std::setw(9)
        << r.samples << std::setw(26) << io::format_double(r.worst) << io::format_double(r.limit);
    if (!r.detail.empty()) out << "  (" << r.detail << ")";
    out << "\n";
  }
  return all ? ok : failure;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"eig-linear", "eig-nonlocal", "branch", "sweep-a",
                                              "properties"};
  return names;
}

ProblemParams problem_from_config(const ExperimentConfig& c) {
  auto ops = std::make_shared<const DiscreteOperators>(assemble_operators(mesh_from_config(c)));
  const NonlinearityKind kind = nonlinearity_kind_from_string(c.nonlinearity.kind);
  NonlinearityParams p;
  p.f0 = c.nonlinearity.f0;
  p.f_inf = c.nonlinearity.f_inf;
  p.a = c.problem.a;
  p.b = c.problem.b;
  p.lambda1 = principal_eigenpair(*ops, 1e-12).lambda;
  if (kind != NonlinearityKind::pure_linear)
    p.mu1 = minimize_mu1(*ops, ops->field(Vector::Ones(ops->size())), 1e-11).mu;
  return make_problem(ops, c.problem.a, c.problem.b, make_nonlinearity(kind, p));
}

int run_command(const std::string& subcommand, const fs::path& config_path,
                const std::vector<std::string>& overrides, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  try {
    if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end())
      throw ConfigError("unknown subcommand " + subcommand);
    config = load_config(config_path, overrides);
  } catch (const Error& e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  }
  try {
    if (subcommand == "eig-linear") return eig_linear(config, out);
    if (subcommand == "eig-nonlocal") return eig_nonlocal(config, out, err);
    if (subcommand == "branch") return branch(config, out, err);
    if (subcommand == "sweep-a") return sweep(config, out, err);
    return properties(config, out);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const InvalidNonlinearityError& e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return failure;
  }
}

}  // namespace kirchhoff::cli
