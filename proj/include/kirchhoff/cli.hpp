#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kirchhoff/config.hpp"
#include "kirchhoff/kirchhoff_core.hpp"

namespace kirchhoff::cli {

enum Status { ok = 0, failure = 1, usage = 2 };

const std::vector<std::string>& subcommands();

/// Operators plus the problem. lambda1 and mu1 in the nonlinearity context are
/// the discrete values on the configured mesh; mu1 is only computed when the
/// kind has a cubic part.
ProblemParams problem_from_config(const ExperimentConfig& config);

/// Runs one subcommand; artifacts go to outputs.directory. Returns a Status.
int run_command(const std::string& subcommand, const std::filesystem::path& config_path,
                const std::vector<std::string>& overrides, std::ostream& out, std::ostream& err);

}  // namespace kirchhoff::cli
