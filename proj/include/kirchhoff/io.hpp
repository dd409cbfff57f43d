#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "kirchhoff/continuation.hpp"
#include "kirchhoff/grid.hpp"
#include "kirchhoff/kirchhoff_core.hpp"
#include "kirchhoff/nonlinearity.hpp"
#include "kirchhoff/spectra_linear.hpp"
#include "kirchhoff/spectra_nonlocal.hpp"

namespace kirchhoff::io {

using nlohmann::json;

/// 17 significant digits, "." decimal, independent of the locale.
std::string format_double(double value);

/// Writes to a sibling temporary and renames over the target, creating the
/// parent directory if needed.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string eigenpairs_csv(const std::vector<EigenPair>& pairs);
std::string nonlocal_csv(const std::vector<NonlocalEigenPair>& pairs);
std::string solution_csv(const std::vector<Solution>& solutions, const DiscreteOperators& ops);
std::string branch_csv(const Branch& branch);

/// x, y, value per interior node.
std::string field_csv(const FieldVector& u, const DiscreteOperators& ops);

json mesh_to_json(const Mesh& mesh);
Mesh mesh_from_json(const json& j);

json nonlinearity_to_json(const Nonlinearity& f);
Nonlinearity nonlinearity_from_json(const json& j);

json gap_report_to_json(const GapReport& report);
json asymptote_to_json(const Branch& branch);
json sweep_report_to_json(const SweepReport& report);

}  // namespace kirchhoff::io
