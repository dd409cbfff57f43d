#include <doctest.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "kirchhoff/config.hpp"
#include "kirchhoff/errors.hpp"
#include "kirchhoff/io.hpp"
#include "kirchhoff/properties.hpp"

using namespace kirchhoff;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kirchhoff_io_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("doubles print with 17 significant digits and round-trip") {
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(-2.5e-300) == "-2.5e-300");
  CHECK(io::format_double(std::nan("")) == "nan");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double x = dist(rng) * std::pow(10.0, k % 40 - 20);
    const std::string s = io::format_double(x);
    char ref[64];
    std::snprintf(ref, sizeof ref, "%.17g", x);  // "C" locale in this process
    CHECK(s == ref);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == x);
  }
}

TEST_CASE("atomic writes leave only the target") {
  const fs::path dir = scratch("atomic");
  const fs::path target = dir / "nested" / "a.csv";
  io::write_atomic(target, "x\n1\n");
  io::write_atomic(target, "x\n2\n");
  CHECK(slurp(target) == "x\n2\n");
  int files = 0;
  for (const auto& e : fs::directory_iterator(target.parent_path())) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
  fs::remove_all(dir);
}

TEST_CASE("branch CSV layout") {
  Branch br;
  BranchPoint p;
  p.lambda = 0.5;
  p.h1_norm = 0.25;
  p.newton_iters = 3;
  p.positive = true;
  br.points = {p, p};
  const std::string csv = io::branch_csv(br);
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  CHECK(header ==
        "step,arc_param,lambda,h1_norm,l2_norm,sup_norm,min_value,residual_norm,newton_iters,positive");
  std::getline(in, row);
  CHECK(row == "0,0,0.5,0.25,0,0,0,0,3,1");
  std::getline(in, row);
  CHECK(row.rfind("1,", 0) == 0);
}

TEST_CASE("mesh and nonlinearity JSON round-trip") {
  const Mesh m = build_mesh(DomainKind::rectangle, {{0, 2}, {-1, 1}}, {6, 4});
  const json j = io::mesh_to_json(m);
  CHECK(j["domain_kind"] == "rectangle");
  const Mesh back = io::mesh_from_json(json::parse(j.dump()));
  CHECK(back.resolution() == m.resolution());
  CHECK(back.bounds()[1].lower == -1.0);
  CHECK(back.node_count() == m.node_count());
  CHECK_THROWS_AS(io::mesh_from_json(json{{"domain_kind", "interval"}}), ConfigError);

  NonlinearityParams p;
  p.f0 = 2;
  p.f_inf = 1;
  p.lambda1 = 9.87;
  p.mu1 = 63.0;
  const Nonlinearity f = make_nonlinearity(NonlinearityKind::saturating, p);
  const json fj = io::nonlinearity_to_json(f);
  CHECK(fj["flags"]["f2"] == true);
  const Nonlinearity g = io::nonlinearity_from_json(json::parse(fj.dump()));
  CHECK(g.kind() == f.kind());
  for (double s : {0.0, 0.3, 2.0, 40.0}) CHECK(g.value(s) == f.value(s));
  CHECK(g.flags().f3 == f.flags().f3);
}

TEST_CASE("config defaults and shipped configs round-trip") {
  const ExperimentConfig d;
  CHECK(config_from_json(json::parse(config_to_json(d).dump())) == d);
  for (const auto& entry : fs::directory_iterator(KIRCHHOFF_CONFIG_DIR)) {
    INFO(entry.path().string());
    const ExperimentConfig c = load_config(entry.path());
    CHECK(config_from_json(json::parse(config_to_json(c).dump())) == c);
  }
}

TEST_CASE("config validation and overrides") {
  json j = config_to_json(ExperimentConfig{});
  apply_override(j, "problem.a=0.25");
  apply_override(j, "nonlinearity.kind=pure_cubic");
  apply_override(j, "domain.resolution=[32]");
  apply_override(j, "outputs.dump_fields=true");
  apply_override(j, "seed=11");
  const ExperimentConfig c = config_from_json(j);
  CHECK(c.problem.a == 0.25);
  CHECK(c.nonlinearity.kind == "pure_cubic");
  CHECK(c.domain.resolution == std::vector<int>{32});
  CHECK(c.outputs.dump_fields);
  CHECK(c.seed == 11u);

  json partial = json::object();
  apply_override(partial, "continuation.max_norm=3");
  CHECK(config_from_json(partial).continuation.max_norm == 3.0);

  CHECK_THROWS_AS(apply_override(j, "problem.c=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "problem"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "problem.a.x=1"), ConfigError);

  json bad = j;
  bad["problem"]["b"] = 0;
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = j;
  bad["solver"]["extra"] = 1;
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = j;
  bad["problem"]["a"] = "one";
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = j;
  bad["domain"]["kind"] = "rectangle";
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = j;
  bad["sweep"]["n_list"] = {4, 2};
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = j;
  bad["domain"]["resolution"] = 16;
  CHECK(config_from_json(bad).domain.resolution == std::vector<int>{16});

  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("branch law column check") {
  const std::string good = "step,lambda,h1_norm\n0,2,1\n1,5,2\n";
  PropertyResult r = branch_law_column_check(good, 1.0, 1.0, 1.0);
  CHECK(r.pass);
  CHECK(r.samples == 2);
  CHECK(r.worst == 0.0);
  r = branch_law_column_check("step,lambda,h1_norm\n0,2.0001,1\n", 1.0, 1.0, 1.0);
  CHECK_FALSE(r.pass);
  CHECK(r.worst == doctest::Approx(0.0001 / 2.0001));
  CHECK_FALSE(branch_law_column_check("step,lambda,h1_norm\n", 1, 1, 1).pass);
  CHECK_THROWS_AS(branch_law_column_check("step,lambda\n0,1\n", 1, 1, 1), InvalidArgumentError);
  CHECK_THROWS_AS(branch_law_column_check("step,lambda,h1_norm\n0,x,1\n", 1, 1, 1),
                  InvalidArgumentError);
}
