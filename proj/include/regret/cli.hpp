#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "regret/conic.hpp"
#include "regret/model.hpp"
#include "regret/sim.hpp"

namespace regret::cli {

/// Invalid configuration; the message starts with the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Synthesis or simulation failure.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

/// Controllers a run can produce.
enum class Mode { H2, Hinf, EnergyRegret, PointwiseRegret, ConstrainedPointwise, AdversarialX0, NonCausal };

[[nodiscard]] std::string mode_name(Mode m);
/// Throws ConfigError for unknown names.
[[nodiscard]] Mode parse_mode(const std::string& name);

struct ScenarioSpec {
  std::string name;
  DisturbanceScenario scenario;
  int count = 1;  // random kinds: number of draws
};

struct ExperimentConfig {
  LtvSystem system;
  CostWeights costs;
  DisturbanceModel disturbance;
  double omega = 0.0;  // energy bound used by energy_regret
  Vec x0;
  std::vector<Mode> modes;
  std::optional<ConstraintSet> constraints;
  std::vector<ScenarioSpec> scenarios;
  conic::SolverOptions solver;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  std::map<std::string, double> reference_costs;  // mode -> expected incurred cost
  double reference_tolerance = 0.05;
  std::string fingerprint;  // hash of the canonical config text
};

/// Parses and validates a JSON config.  Throws ConfigError.
[[nodiscard]] ExperimentConfig parse_config(const std::string& text);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  std::vector<std::string> modes;  // overrides the config list when non-empty
  bool quiet = false;
};

/// Applies command-line overrides.  Throws ConfigError.
void apply_overrides(ExperimentConfig& cfg, const RunOptions& opts);

/// Synthesises every mode; writes Phi_<mode>.txt, K_<mode>.txt and
/// certificate_<mode>.json to the output directory.
void run_synth(const ExperimentConfig& cfg, bool quiet = false);
/// Simulates every mode on every scenario; writes per-scenario summaries
/// and trajectories.
void run_simulate(const ExperimentConfig& cfg, bool quiet = false);
/// Table of incurred cost, regret and bound on the first scenario, plus the
/// cumulative-cost and state series per controller.
void run_compare(const ExperimentConfig& cfg, bool quiet = false);
/// Prints the aligned summary table written by run_compare.
void run_table(const ExperimentConfig& cfg);

/// Entry point shared by the executable and the tests; returns the exit code.
int main_entry(int argc, char** argv);

}  // namespace regret::cli
