#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "kirchhoff/cli.hpp"

using namespace kirchhoff;
namespace fs = std::filesystem;

namespace {

const fs::path configs = KIRCHHOFF_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kirchhoff_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& sub, const fs::path& config, std::vector<std::string> overrides,
        std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int status = cli::run_command(sub, config, overrides, out, err);
  if (out_text) *out_text = out.str();
  return status;
}

}  // namespace

TEST_CASE("missing config is a usage error and writes nothing") {
  const fs::path dir = scratch("missing");
  CHECK(run("branch", "/nonexistent.json", {"outputs.directory=" + dir.string()}) == cli::usage);
  CHECK_FALSE(fs::exists(dir));
  CHECK(run("frobnicate", configs / "eig_interval_pi.json", {}) == cli::usage);
  CHECK(run("branch", configs / "eig_interval_pi.json", {"problem.b=-1"}) == cli::usage);
}

TEST_CASE("eig-linear on (0, pi) reports lambda1 near 1") {
  const fs::path dir = scratch("eig");
  REQUIRE(run("eig-linear", configs / "eig_interval_pi.json", {"outputs.directory=" + dir.string()}) ==
          cli::ok);
  std::istringstream csv(slurp(dir / "eigenpairs.csv"));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "index,lambda,residual");
  const auto first = row.find(',') + 1;
  const auto second = row.find(',', first);
  double lambda = 0;
  std::from_chars(row.data() + first, row.data() + second, lambda);
  CHECK(std::abs(lambda - 1.0) < 1e-4);
  fs::remove_all(dir);
}

TEST_CASE("branch output is deterministic and passes the column check") {
  const fs::path a = scratch("branch_a"), b = scratch("branch_b");
  const std::vector<std::string> common{"domain.resolution=[96]", "continuation.max_norm=3"};
  auto with_dir = [&](const fs::path& d) {
    auto o = common;
    o.push_back("outputs.directory=" + d.string());
    return o;
  };
  REQUIRE(run("branch", configs / "linear_branch_law.json", with_dir(a)) == cli::ok);
  REQUIRE(run("branch", configs / "linear_branch_law.json", with_dir(b)) == cli::ok);
  const std::string csv = slurp(a / "branch.csv");
  CHECK(csv.size() > 1000);
  CHECK(csv == slurp(b / "branch.csv"));
  CHECK(fs::exists(a / "asymptote.json"));

  std::string table;
  CHECK(run("properties", configs / "linear_branch_law.json", with_dir(a), &table) == cli::ok);
  CHECK(table.find("branch_law") != std::string::npos);
  CHECK(table.find("FAIL") == std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("field dumps are gated by dump_fields") {
  const fs::path dir = scratch("dump");
  REQUIRE(run("eig-linear", configs / "eig_interval_pi.json",
              {"outputs.directory=" + dir.string(), "outputs.dump_fields=true",
               "domain.resolution=[16]"}) == cli::ok);
  CHECK(fs::exists(dir / "fields" / "phi_1.csv"));
  fs::remove_all(dir);
}

TEST_CASE("sweep-a needs a = 0") {
  const fs::path dir = scratch("sweep");
  CHECK(run("sweep-a", configs / "vanishing_a_sweep.json",
            {"outputs.directory=" + dir.string(), "problem.a=0.5"}) == cli::usage);
  REQUIRE(run("sweep-a", configs / "vanishing_a_sweep.json",
              {"outputs.directory=" + dir.string(), "domain.resolution=[48]",
               "continuation.max_norm=15", "sweep.n_list=[1,2,4]"}) == cli::ok);
  CHECK(fs::exists(dir / "family_report.json"));
  CHECK(fs::exists(dir / "branch_n4.csv"));
  CHECK(fs::exists(dir / "branch_direct.csv"));
  fs::remove_all(dir);
}
