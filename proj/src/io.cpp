#include "kirchhoff/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "kirchhoff/errors.hpp"

namespace kirchhoff::io {

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      if (!first) out_ += ',';
      out_ += h;
      first = false;
    }
    out_ += '\n';
  }

  Csv& add(double v) { return cell(format_double(v)); }
  Csv& add(long long v) { return cell(std::to_string(v)); }
  Csv& add(int v) { return cell(std::to_string(v)); }
  Csv& add(std::uint64_t v) { return cell(std::to_string(v)); }
  Csv& add(bool v) { return cell(v ? "1" : "0"); }
  void end() {
    out_ += '\n';
    fresh_ = true;
  }
  const std::string& str() const { return out_; }

 private:
  Csv& cell(const std::string& s) {
    if (!fresh_) out_ += ',';
    out_ += s;
    fresh_ = false;
    return *this;
  }

  std::string out_;
  bool fresh_ = true;
};

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string eigenpairs_csv(const std::vector<EigenPair>& pairs) {
  Csv csv{"index", "lambda", "residual"};
  for (const EigenPair& p : pairs) {
    csv.add(p.index).add(p.lambda).add(p.residual);
    csv.end();
  }
  return csv.str();
}

std::string nonlocal_csv(const std::vector<NonlocalEigenPair>& pairs) {
  Csv csv{"mu", "residual", "iterations", "seed_id"};
  for (const NonlocalEigenPair& p : pairs) {
    csv.add(p.mu).add(p.residual).add(p.iterations).add(p.converged_from);
    csv.end();
  }
  return csv.str();
}

std::string solution_csv(const std::vector<Solution>& solutions, const DiscreteOperators& ops) {
  Csv csv{"lambda", "h1_norm", "l2_norm", "sup_norm", "min_value", "residual_norm",
          "newton_iters", "positive"};
  for (const Solution& s : solutions) {
    const FieldNorms n = field_norms(s.u, ops);
    csv.add(s.lambda).add(n.h1).add(n.l2).add(n.sup).add(n.min).add(s.residual_norm)
        .add(s.newton_iters).add(s.positive);
    csv.end();
  }
  return csv.str();
}

std::string branch_csv(const Branch& branch) {
  Csv csv{"step", "arc_param", "lambda", "h1_norm", "l2_norm", "sup_norm",
          "min_value", "residual_norm", "newton_iters", "positive"};
  int step = 0;
  for (const BranchPoint& p : branch.points) {
    csv.add(step++).add(p.arc_param).add(p.lambda).add(p.h1_norm).add(p.l2_norm).add(p.sup_norm)
        .add(p.min_value).add(p.residual_norm).add(p.newton_iters).add(p.positive);
    csv.end();
  }
  return csv.str();
}

std::string field_csv(const FieldVector& u, const DiscreteOperators& ops) {
  require_same_mesh(ops.mesh_id(), u.mesh_id, "field_csv");
  const Mesh& mesh = ops.mesh();
  Csv csv{"x", "y", "value"};
  for (int d = 0; d < mesh.interior_count(); ++d) {
    const auto& x = mesh.node(mesh.node_of_dof(d));
    csv.add(x[0]).add(x[1]).add(u.values[d]);
    csv.end();
  }
  return csv.str();
}

json mesh_to_json(const Mesh& mesh) {
  json bounds = json::array();
  for (const AxisBounds& b : mesh.bounds()) bounds.push_back({b.lower, b.upper});
  return {{"domain_kind", std::string(to_string(mesh.kind()))},
          {"bounds", bounds},
          {"resolution", mesh.resolution()}};
}

Mesh mesh_from_json(const json& j) {
  try {
    std::vector<AxisBounds> bounds;
    for (const json& b : j.at("bounds")) bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    return build_mesh(domain_kind_from_string(j.at("domain_kind").get<std::string>()),
                      std::move(bounds), j.at("resolution").get<std::vector<int>>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("mesh description: ") + e.what());
  }
}

json nonlinearity_to_json(const Nonlinearity& f) {
  const NonlinearityParams& p = f.params();
  const HypothesisFlags& h = f.flags();
  const DeclaredConstants& d = f.declared();
  return {{"kind", std::string(to_string(f.kind()))},
          {"params",
           {{"f0", p.f0}, {"f_inf", p.f_inf}, {"a", p.a}, {"b", p.b}, {"lambda1", p.lambda1},
            {"mu1", p.mu1}}},
          {"flags", {{"f1", h.f1}, {"f2", h.f2}, {"f3", h.f3}, {"f4", h.f4}}},
          {"declared",
           {{"f0", number(d.f0)}, {"f0_tilde", number(d.f0_tilde)}, {"f_inf", number(d.f_inf)}}}};
}

Nonlinearity nonlinearity_from_json(const json& j) {
  try {
    const json& p = j.at("params");
    NonlinearityParams params;
    params.f0 = p.at("f0").get<double>();
    params.f_inf = p.at("f_inf").get<double>();
    params.a = p.at("a").get<double>();
    params.b = p.at("b").get<double>();
    params.lambda1 = p.at("lambda1").get<double>();
    params.mu1 = p.at("mu1").get<double>();
    Nonlinearity f =
        make_nonlinearity(nonlinearity_kind_from_string(j.at("kind").get<std::string>()), params);
    if (j.contains("declared")) {
      const json& d = j.at("declared");
      f = f.with_declared({number_or_nan(d.at("f0")), number_or_nan(d.at("f0_tilde")),
                           number_or_nan(d.at("f_inf"))});
    }
    return f;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("nonlinearity description: ") + e.what());
  }
}

json gap_report_to_json(const GapReport& r) {
  json runs = json::array();
  for (const SeedRun& s : r.runs)
    runs.push_back({{"seed_id", s.seed_id},
                    {"positive_seed", s.positive_seed},
                    {"converged", s.converged},
                    {"mu", number(s.mu)},
                    {"iterations", s.iterations}});
  return {{"mu1", r.mu1},
          {"mu2", r.mu2},
          {"gap", r.gap},
          {"refined", r.refined},
          {"refined_mu1", r.refined_mu1},
          {"refined_mu2", r.refined_mu2},
          {"refined_gap", r.refined_gap},
          {"relative_change", r.relative_change},
          {"window_values", r.window_values},
          {"only_mu1_in_window", r.only_mu1_in_window},
          {"max_positive_mu_deviation", r.max_positive_mu_deviation},
          {"max_positive_psi_distance", r.max_positive_psi_distance},
          {"runs", runs}};
}

namespace {

json estimate_json(const std::optional<AsymptoteEstimate>& est) {
  if (!est) return nullptr;
  return {{"lambda_inf", number(est->lambda_inf)},
          {"slope", number(est->slope)},
          {"uncertainty", number(est->uncertainty)},
          {"points_used", est->points_used},
          {"reliable", est->reliable}};
}

json member_json(const SweepMember& m) {
  return {{"n", m.n},
          {"a", m.a},
          {"expected_origin", m.expected_origin},
          {"origin", m.origin},
          {"failed", m.failed},
          {"failure", m.failure},
          {"points", m.branch.points.size()},
          {"termination", std::string(to_string(m.branch.termination))},
          {"max_h1_norm", m.branch.points.empty() ? 0.0 : m.branch.points.back().h1_norm},
          {"asymptote", estimate_json(m.branch.asymptote)}};
}

}  // namespace

json asymptote_to_json(const Branch& branch) {
  return {{"origin", branch.origin.lambda_star},
          {"lambda1", branch.origin.lambda1},
          {"points", branch.points.size()},
          {"termination", std::string(to_string(branch.termination))},
          {"detail", branch.detail},
          {"folds", branch.folds},
          {"max_h1_norm", branch.points.empty() ? 0.0 : branch.points.back().h1_norm},
          {"asymptote", estimate_json(branch.asymptote)}};
}

json sweep_report_to_json(const SweepReport& r) {
  json members = json::array();
  for (const SweepMember& m : r.members) members.push_back(member_json(m));
  json comparisons = json::array();
  for (const MatchedComparison& c : r.comparisons) {
    json diffs = json::array();
    for (double d : c.lambda_difference) diffs.push_back(number(d));
    comparisons.push_back({{"n_coarse", c.n_coarse},
                           {"n_fine", c.n_fine},
                           {"norms", c.norms},
                           {"lambda_difference", diffs},
                           {"max_difference", number(c.max_difference)}});
  }
  json probe = nullptr;
  if (r.probe_solution)
    probe = {{"lambda", r.probe_solution->lambda},
             {"positive", r.probe_solution->positive},
             {"residual_norm", r.probe_solution->residual_norm}};
  return {{"f0_tilde", number(r.f0_tilde)},
          {"f_inf", number(r.f_inf)},
          {"origins", members},
          {"direct", member_json(r.direct)},
          {"matched_norms", r.matched_norms},
          {"comparisons", comparisons},
          {"max_origin_error", r.max_origin_error},
          {"origins_match", r.origins_match},
          {"differences_decreasing", r.differences_decreasing},
          {"limit_asymptote", estimate_json(r.limit_asymptote)},
          {"direct_asymptote", estimate_json(r.direct_asymptote)},
          {"probe_lambda", r.probe_lambda},
          {"probe_solution", probe}};
}

}  // namespace kirchhoff::io
