#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace kirchhoff {

struct ExperimentConfig {
  struct Domain {
    std::string kind = "interval";
    std::vector<std::array<double, 2>> bounds{{0.0, 1.0}};
    std::vector<int> resolution{128};
    bool operator==(const Domain&) const = default;
  } domain;
  struct Problem {
    double a = 1.0;
    double b = 1.0;
    bool operator==(const Problem&) const = default;
  } problem;
  struct NonlinearitySection {
    std::string kind = "sum_linear_cubic";
    double f0 = 1.0;
    double f_inf = 1.0;
    bool operator==(const NonlinearitySection&) const = default;
  } nonlinearity;
  struct Solver {
    double newton_tol = 1e-10;
    int max_iters = 50;
    bool operator==(const Solver&) const = default;
  } solver;
  struct Continuation {
    double step_ds = 0.1;
    int max_steps = 500;
    double max_norm = 10.0;
    bool operator==(const Continuation&) const = default;
  } continuation;
  struct Outputs {
    std::string directory = "out";
    bool dump_fields = false;
    bool operator==(const Outputs&) const = default;
  } outputs;
  std::uint64_t seed = 0;
  /// Optional; only sweep-a reads it.
  struct Sweep {
    std::vector<int> n_list{1, 2, 4, 8, 16};
    double probe_lambda = 1.0;
    bool operator==(const Sweep&) const = default;
  } sweep;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Unknown keys, wrong types and out-of-range values raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// "section.key=value"; the value is parsed as JSON when it parses, otherwise
/// taken as a string. The key must already exist.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// Reads the file, applies the overrides in order and validates.
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

}  // namespace kirchhoff
