#include <iostream>

#include "CLI11.hpp"
#include "regret/cli.hpp"

namespace regret::cli {

int main_entry(int argc, char** argv) {
  CLI::App app{"Finite-horizon regret-optimal controller synthesis"};
  app.require_subcommand(1);
  std::string config;
  RunOptions opts;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::string out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Experiment config (JSON)")->required();
    sub->add_option("--out", out, "Output directory (overrides the config)");
    sub->add_option("--seed", seed, "Seed for random scenarios");
    sub->add_option("--tol", tol, "Solver tolerance");
    sub->add_option("--mode", opts.modes, "Mode to run (repeatable; overrides the config list)");
    sub->add_flag("--quiet", opts.quiet, "Only print errors");
  };
  CLI::App* synth = app.add_subcommand("synth", "Synthesise controllers and write certificates");
  CLI::App* simulate = app.add_subcommand("simulate", "Roll out every controller on every scenario");
  CLI::App* compare = app.add_subcommand("compare", "Summary table and cumulative-cost series");
  CLI::App* table = app.add_subcommand("table", "Print the summary table of a previous compare run");
  for (CLI::App* s : {synth, simulate, compare, table}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    ExperimentConfig cfg = load_config(config);
    for (CLI::App* s : {synth, simulate, compare, table}) {
      if (!s->parsed()) continue;
      if (s->count("--out")) opts.out_dir = out;
      if (s->count("--seed")) opts.seed = seed;
      if (s->count("--tol")) opts.tolerance = tol;
    }
    apply_overrides(cfg, opts);
    if (synth->parsed()) run_synth(cfg, opts.quiet);
    if (simulate->parsed()) run_simulate(cfg, opts.quiet);
    if (compare->parsed()) run_compare(cfg, opts.quiet);
    if (table->parsed()) run_table(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace regret::cli
