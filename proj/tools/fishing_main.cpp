#include <CLI11.hpp>

#include <iostream>

#include "cli.hpp"
#include "fishing/experiment.hpp"

int main(int argc, char** argv) {
  using namespace fishing;

  CLI::App app{"Enumerate candidate culprit MAC addresses from probe-request logs"};
  app.require_subcommand(1);
  const std::vector<std::string> formats{"table", "machine"};
  const std::vector<std::string> policies{"static", "randomize_per_probe"};

  cli::SimulateOptions simulate;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a scenario file into an event log directory");
  sim_cmd->add_option("--scenario", simulate.scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--out", simulate.out, "Output directory")->required();
  sim_cmd->add_option("--seed", simulate.seed, "Override the scenario seed");

  cli::FilterOptions filter;
  auto* filter_cmd = app.add_subcommand("filter", "Compute the suspicious-rate table for a log directory");
  filter_cmd->add_option("--log", filter.log_dir, "Log directory holding events.tsv")->required();
  filter_cmd->add_option("--intervals", filter.intervals, "Staying intervals (JSON)")->required();
  filter_cmd->add_option("--config", filter.config, "Filter config (JSON)");
  filter_cmd->add_option("--format", filter.format, "Printed format")->check(CLI::IsMember(formats));
  filter_cmd->add_option("--out", filter.out, "Machine-readable table path (default <log>/result.json)");

  cli::ExperimentOptions experiment;
  experiment.seed = experiment::kDefaultSeed;
  auto* exp_cmd = app.add_subcommand("experiment", "Reproduce the ten-trial field experiment in simulation");
  exp_cmd->add_option("--trials", experiment.trials, "Number of trials")->check(CLI::Range(1, experiment::kTrialCount));
  exp_cmd->add_option("--seed", experiment.seed, "Experiment seed");
  exp_cmd->add_option("--config", experiment.config, "Filter config (JSON)");
  exp_cmd->add_option("--format", experiment.format, "Printed format")->check(CLI::IsMember(formats));
  exp_cmd->add_option("--mac-policy", experiment.culprit_mac_policy, "Culprit device MAC policy")
      ->check(CLI::IsMember(policies));
  exp_cmd->add_option("--threads", experiment.threads, "Worker threads (0 = all cores)");
  exp_cmd->add_option("--out", experiment.out, "Write the machine-readable summary here");

  cli::ScenarioOptions scenario;
  scenario.seed = experiment::kDefaultSeed;
  auto* scn_cmd = app.add_subcommand("scenario", "Write one experiment trial as a scenario file");
  scn_cmd->add_option("--trial", scenario.trial, "Trial index")->check(CLI::Range(0, experiment::kTrialCount - 1));
  scn_cmd->add_option("--seed", scenario.seed, "Experiment seed");
  scn_cmd->add_option("--mac-policy", scenario.culprit_mac_policy, "Culprit device MAC policy")
      ->check(CLI::IsMember(policies));
  scn_cmd->add_option("--out", scenario.out, "Scenario file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kValidation;
  }

  if (*sim_cmd) return cli::cmd_simulate(simulate, std::cout, std::cerr);
  if (*filter_cmd) return cli::cmd_filter(filter, std::cout, std::cerr);
  if (*exp_cmd) return cli::cmd_experiment(experiment, std::cout, std::cerr);
  return cli::cmd_scenario(scenario, std::cout, std::cerr);
}
