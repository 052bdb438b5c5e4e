#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "regret/cli.hpp"
#include "regret/matrix_io.hpp"

using namespace regret;
using namespace regret::cli;
namespace fs = std::filesystem;

namespace {

nlohmann::json small_config(const fs::path& out) {
  auto j = nlohmann::json::parse(R"({
    "system": {"horizon": 6, "A": [[1.0, 0.1], [-0.02, 0.99]], "B": [[0.0], [0.1]], "E": [[1.0, 0.0], [0.0, 1.0]]},
    "costs": {"Q": [[0.1, 0.0], [0.0, 0.1]], "R": [[1.0]]},
    "disturbance": {"kind": "ellipsoid", "P": [[1.0, 0.0], [0.0, 1.0]]},
    "x0": [1.0, 2.0],
    "modes": ["h2", "hinf", "energy_regret", "pointwise_regret", "constrained_pointwise_regret", "adversarial_x0",
              "noncausal"],
    "constraints": {"Hx": [[0.1, 0.0]], "Hu": [[0.2], [-0.2]]},
    "scenarios": [
      {"name": "constant", "kind": "constant", "value": [0.7071067811865476, 0.7071067811865476]},
      {"name": "boundary", "kind": "boundary_ellipsoid", "count": 20, "seed": 3},
      {"name": "worst", "kind": "worst_case_energy"}
    ],
    "solver": {"tolerance": 1e-8}
  })");
  j["output"] = out.string();
  return j;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("regret_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> all{"regret_cli"};
  all.insert(all.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : all) argv.push_back(a.data());
  return main_entry(static_cast<int>(argv.size()), argv.data());
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
  fs::create_directories(dir);
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string config_error(const nlohmann::json& j) {
  try {
    (void)parse_config(j.dump());
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::map<std::string, std::vector<std::string>> read_summary(const fs::path& p) {
  std::map<std::string, std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows[cells.at(0)] = cells;
  }
  return rows;
}

}  // namespace

TEST_CASE("config validation names the field") {
  const auto base = small_config("unused");
  auto j = base;
  j["modes"] = nlohmann::json::array();
  CHECK(config_error(j) == "modes: at least one required");
  j = base;
  j["modes"] = {"lqg"};
  CHECK(config_error(j).rfind("modes", 0) == 0);
  j = base;
  j["system"]["A"] = {{1.0, 0.0}};
  CHECK(config_error(j).rfind("system", 0) == 0);
  CHECK(config_error(j).find("A") != std::string::npos);
  j = base;
  j["x0"] = {1.0};
  CHECK(config_error(j).rfind("x0", 0) == 0);
  j = base;
  j["disturbance"]["P"] = {{-1.0, 0.0}, {0.0, 1.0}};
  CHECK(config_error(j).rfind("disturbance", 0) == 0);
  j = base;
  j["costs"]["R"] = {{"a"}};
  CHECK(config_error(j).rfind("costs.R", 0) == 0);
  CHECK_THROWS_AS((void)parse_config("{not json"), ConfigError);
}

TEST_CASE("config derives omega from the ellipsoid") {
  const auto cfg = parse_config(small_config("unused").dump());
  CHECK(cfg.omega == doctest::Approx(6.0));
  CHECK(cfg.system.T == 6);
  CHECK(cfg.modes.size() == 7);
  CHECK(parse_mode("constrained_pointwise_regret") == Mode::ConstrainedPointwise);
  CHECK_THROWS_AS((void)parse_mode("nope"), ConfigError);
}

TEST_CASE("exit codes") {
  const fs::path dir = fresh_dir("exit");
  auto j = small_config(dir / "out");
  j["modes"] = nlohmann::json::array();
  CHECK(run({"synth", "--config", write_config(dir, j).string(), "--quiet"}) == kExitConfig);
  CHECK(run({"synth", "--config", (dir / "missing.json").string(), "--quiet"}) == kExitConfig);
  // A constraint already violated by x0 makes the constrained synthesis fail.
  j = small_config(dir / "out");
  j["constraints"]["Hx"] = {{2.0, 0.0}};
  j["modes"] = {"constrained_pointwise_regret"};
  CHECK(run({"synth", "--config", write_config(dir, j).string(), "--quiet"}) == kExitSolver);
}

TEST_CASE("synth writes certificates and matrices") {
  const fs::path dir = fresh_dir("synth");
  const fs::path cfg = write_config(dir, small_config(dir / "out"));
  REQUIRE(run({"synth", "--config", cfg.string(), "--quiet"}) == kExitOk);
  const auto cert = nlohmann::json::parse(slurp(dir / "out" / "certificate_energy_regret.json"));
  for (const char* key :
       {"mode", "gamma_star", "lambda", "sigma_max", "solve_seconds", "max_psd_violation", "solver_status"})
    CHECK(cert.contains(key));
  CHECK(cert["solver_status"] == "optimal");
  const auto pw = nlohmann::json::parse(slurp(dir / "out" / "certificate_pointwise_regret.json"));
  CHECK(pw["gamma_star"].get<double>() <= cert["gamma_star"].get<double>() + 1e-6);
  const Mat Phi = read_matrix((dir / "out" / "Phi_energy_regret.txt").string());
  CHECK(Phi.rows() == 21);
  CHECK(Phi.cols() == 14);
  const Mat K = read_matrix((dir / "out" / "K_energy_regret.txt").string());
  CHECK(K.rows() == 7);
  CHECK(K.cols() == 14);
  CHECK(fs::exists(dir / "out" / "certificate_noncausal.json"));
}

TEST_CASE("compare table accounting and determinism") {
  const fs::path dir = fresh_dir("compare");
  const fs::path cfg = write_config(dir, small_config(dir / "out"));
  REQUIRE(run({"compare", "--config", cfg.string(), "--quiet"}) == kExitOk);
  const auto rows = read_summary(dir / "out" / "summary.csv");
  REQUIRE(rows.count("noncausal"));
  const double jstar = std::stod(rows.at("noncausal").at(1));
  for (const auto& [name, cells] : rows) {
    CHECK(std::abs(std::stod(cells.at(1)) - jstar - std::stod(cells.at(2))) <= 1e-6 * std::max(1.0, jstar));
    if (name == "h2" || name == "hinf" || name == "noncausal") CHECK(cells.at(3) == "n/a");
  }
  CHECK(std::stod(rows.at("pointwise_regret").at(3)) <= std::stod(rows.at("energy_regret").at(3)) + 1e-6);
  for (const char* f : {"summary.txt", "cumulative_energy_regret.csv", "states_energy_regret.csv"})
    CHECK(fs::exists(dir / "out" / f));

  // Same config and seed from scratch: identical CSV bytes.
  const std::string first = slurp(dir / "out" / "summary.csv");
  const std::string series = slurp(dir / "out" / "cumulative_pointwise_regret.csv");
  fs::remove_all(dir / "out");
  REQUIRE(run({"compare", "--config", cfg.string(), "--quiet"}) == kExitOk);
  CHECK(slurp(dir / "out" / "summary.csv") == first);
  CHECK(slurp(dir / "out" / "cumulative_pointwise_regret.csv") == series);
}

TEST_CASE("zero disturbance leaves only the initial-state regret") {
  const fs::path dir = fresh_dir("zero");
  auto j = small_config(dir / "out");
  j["x0"] = {0.0, 0.0};
  j["modes"] = {"h2", "energy_regret", "noncausal"};
  j["scenarios"] = {{{"name", "zero"}, {"kind", "constant"}, {"value", {0.0, 0.0}}}};
  REQUIRE(run({"compare", "--config", write_config(dir, j).string(), "--quiet"}) == kExitOk);
  for (const auto& [name, cells] : read_summary(dir / "out" / "summary.csv"))
    CHECK(std::abs(std::stod(cells.at(2))) <= 1e-9);
}

TEST_CASE("simulate writes per-scenario summaries and respects overrides") {
  const fs::path dir = fresh_dir("simulate");
  auto j = small_config(dir / "out");
  j["modes"] = {"pointwise_regret", "constrained_pointwise_regret", "noncausal"};
  const fs::path cfg = write_config(dir, j);
  REQUIRE(run({"simulate", "--config", cfg.string(), "--out", (dir / "alt").string(), "--seed", "5", "--quiet"}) ==
          kExitOk);
  CHECK(fs::exists(dir / "alt" / "simulate_boundary.csv"));
  CHECK(fs::exists(dir / "alt" / "simulate_worst.csv"));
  CHECK_FALSE(fs::exists(dir / "out"));
  const std::string text = slurp(dir / "alt" / "simulate_boundary.csv");
  CHECK(text.find("constrained_pointwise_regret") != std::string::npos);
  REQUIRE(run({"table", "--config", cfg.string(), "--out", (dir / "alt").string()}) == kExitConfig);
}

TEST_CASE("matrix files round trip") {
  Mat M(2, 3);
  M << 1.0 / 3.0, -2.5e-17, 7.0, 1e300, 0.0, -4.0;
  std::stringstream ss;
  write_matrix(ss, M);
  CHECK(ss.str().rfind("2 3\n", 0) == 0);
  CHECK(read_matrix(ss) == M);
}
