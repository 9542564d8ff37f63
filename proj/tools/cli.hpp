#pragma once

// Batch commands behind the `fishing` executable. Each returns the process
// exit code: 0 success, 1 validation (bad input), 2 internal.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "fishing/error.hpp"

namespace fishing::cli {

enum ExitCode : int { kSuccess = 0, kValidation = 1, kInternal = 2 };

int exit_code(ErrorCode code);

struct SimulateOptions {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
};

/// Writes events.tsv, sightings.tsv, truth.json, log.json and scenario.json into `out`.
int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);

struct FilterOptions {
  std::string log_dir;
  std::string intervals;
  std::optional<std::string> config;
  std::string format = "table";
  /// Machine-readable table; defaults to <log_dir>/result.json.
  std::optional<std::string> out;
};

int cmd_filter(const FilterOptions& options, std::ostream& out, std::ostream& err);

struct ExperimentOptions {
  int trials = 10;
  std::uint64_t seed = 0;
  std::optional<std::string> config;
  std::string format = "table";
  std::string culprit_mac_policy = "static";
  unsigned threads = 0;
  std::optional<std::string> out;
};

int cmd_experiment(const ExperimentOptions& options, std::ostream& out, std::ostream& err);

struct ScenarioOptions {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string culprit_mac_policy = "static";
  std::string out;
};

/// Writes the experiment harness scenario for one trial as a scenario file.
int cmd_scenario(const ScenarioOptions& options, std::ostream& out, std::ostream& err);

}  // namespace fishing::cli
