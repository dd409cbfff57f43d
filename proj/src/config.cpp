#include "kirchhoff/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "kirchhoff/errors.hpp"

namespace kirchhoff {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key " + where + "." + key);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for " + where + "." + key);
  }
}

void validate(const ExperimentConfig& c) {
  const auto& d = c.domain;
  if (d.kind != "interval" && d.kind != "rectangle")
    throw ConfigError("domain.kind must be interval or rectangle");
  const std::size_t dim = d.kind == "interval" ? 1 : 2;
  if (d.bounds.size() != dim) throw ConfigError("domain.bounds needs one [lo, hi] pair per axis");
  if (d.resolution.size() != 1 && d.resolution.size() != dim)
    throw ConfigError("domain.resolution needs 1 or " + std::to_string(dim) + " entries");
  for (const auto& b : d.bounds)
    if (!(b[0] < b[1])) throw ConfigError("domain.bounds must be increasing");
  for (int r : d.resolution)
    if (r < 2) throw ConfigError("domain.resolution must be at least 2");
  if (!(c.problem.a >= 0)) throw ConfigError("problem.a must be >= 0");
  if (!(c.problem.b > 0)) throw ConfigError("problem.b must be > 0");
  if (!(c.nonlinearity.f0 >= 0) || !(c.nonlinearity.f_inf >= 0))
    throw ConfigError("nonlinearity constants must be >= 0");
  if (!(c.solver.newton_tol > 0)) throw ConfigError("solver.newton_tol must be > 0");
  if (c.solver.max_iters < 1) throw ConfigError("solver.max_iters must be >= 1");
  if (!(c.continuation.step_ds > 0)) throw ConfigError("continuation.step_ds must be > 0");
  if (c.continuation.max_steps < 1) throw ConfigError("continuation.max_steps must be >= 1");
  if (c.outputs.directory.empty()) throw ConfigError("outputs.directory must not be empty");
  for (std::size_t k = 0; k < c.sweep.n_list.size(); ++k)
    if (c.sweep.n_list[k] < 1 || (k > 0 && c.sweep.n_list[k] <= c.sweep.n_list[k - 1]))
      throw ConfigError("sweep.n_list must be ascending positive integers");
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  check_keys(j, "config",
             {"domain", "problem", "nonlinearity", "solver", "continuation", "outputs", "seed",
              "sweep"});
  if (j.contains("domain")) {
    const json& s = j["domain"];
    check_keys(s, "domain", {"kind", "bounds", "resolution"});
    read(s, "kind", c.domain.kind, "domain");
    read(s, "bounds", c.domain.bounds, "domain");
    if (s.contains("resolution") && s["resolution"].is_number_integer())
      c.domain.resolution = {s["resolution"].get<int>()};
    else
      read(s, "resolution", c.domain.resolution, "domain");
  }
  if (j.contains("problem")) {
    const json& s = j["problem"];
    check_keys(s, "problem", {"a", "b"});
    read(s, "a", c.problem.a, "problem");
    read(s, "b", c.problem.b, "problem");
  }
  if (j.contains("nonlinearity")) {
    const json& s = j["nonlinearity"];
    check_keys(s, "nonlinearity", {"kind", "f0", "f_inf"});
    read(s, "kind", c.nonlinearity.kind, "nonlinearity");
    read(s, "f0", c.nonlinearity.f0, "nonlinearity");
    read(s, "f_inf", c.nonlinearity.f_inf, "nonlinearity");
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    check_keys(s, "solver", {"newton_tol", "max_iters"});
    read(s, "newton_tol", c.solver.newton_tol, "solver");
    read(s, "max_iters", c.solver.max_iters, "solver");
  }
  if (j.contains("continuation")) {
    const json& s = j["continuation"];
    check_keys(s, "continuation", {"step_ds", "max_steps", "max_norm"});
    read(s, "step_ds", c.continuation.step_ds, "continuation");
    read(s, "max_steps", c.continuation.max_steps, "continuation");
    read(s, "max_norm", c.continuation.max_norm, "continuation");
  }
  if (j.contains("outputs")) {
    const json& s = j["outputs"];
    check_keys(s, "outputs", {"directory", "dump_fields"});
    read(s, "directory", c.outputs.directory, "outputs");
    read(s, "dump_fields", c.outputs.dump_fields, "outputs");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    check_keys(s, "sweep", {"n_list", "probe_lambda"});
    read(s, "n_list", c.sweep.n_list, "sweep");
    read(s, "probe_lambda", c.sweep.probe_lambda, "sweep");
  }
  validate(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return {{"domain",
           {{"kind", c.domain.kind}, {"bounds", c.domain.bounds}, {"resolution", c.domain.resolution}}},
          {"problem", {{"a", c.problem.a}, {"b", c.problem.b}}},
          {"nonlinearity",
           {{"kind", c.nonlinearity.kind}, {"f0", c.nonlinearity.f0}, {"f_inf", c.nonlinearity.f_inf}}},
          {"solver", {{"newton_tol", c.solver.newton_tol}, {"max_iters", c.solver.max_iters}}},
          {"continuation",
           {{"step_ds", c.continuation.step_ds},
            {"max_steps", c.continuation.max_steps},
            {"max_norm", c.continuation.max_norm}}},
          {"outputs", {{"directory", c.outputs.directory}, {"dump_fields", c.outputs.dump_fields}}},
          {"seed", c.seed},
          {"sweep", {{"n_list", c.sweep.n_list}, {"probe_lambda", c.sweep.probe_lambda}}}};
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must be key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  // Missing sections and keys are filled from the defaults so that any listed
  // field can be overridden even when the file leaves it out.
  const json defaults = config_to_json(ExperimentConfig{});
  json* node = &j;
  const json* dnode = &defaults;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty() || !dnode->is_object() || !dnode->contains(part))
      throw ConfigError("unknown override key " + key);
    dnode = &(*dnode)[part];
    if (!node->is_object()) throw ConfigError("override path is not a section: " + key);
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    if (!node->contains(part)) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str(), nullptr, false, true);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
  for (const std::string& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

}  // namespace kirchhoff
