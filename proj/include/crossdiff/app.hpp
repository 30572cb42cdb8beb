#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crossdiff/scenario.hpp"

namespace crossdiff {

enum ExitCode : int {
  kExitOk = 0,
  kExitSolverFailure = 1,
  kExitConfigError = 2,
  kExitInfeasible = 3,
};

struct CommandOptions {
  std::string verb;
  std::string config_path;
  std::string out_dir;
  bool require_feasible = false;
  std::optional<std::vector<double>> epsilons;
  std::optional<std::uint64_t> seed;
  bool timing = false;  // record wall time in the manifest (breaks byte-identical reruns)
};

struct RunManifest {
  std::string command;
  std::string status;  // ok | solver_failure | infeasible | config_error
  int exit_code = kExitOk;
  std::string message;
  std::string config_hash;
  std::vector<std::string> artifacts;
  std::optional<double> wall_time;
  nlohmann::json config;
  nlohmann::json summary = nlohmann::json::object();

  nlohmann::json to_json() const;
};

const std::vector<std::string>& verbs();

// Runs one command on a parsed config and writes every artifact plus manifest.json.
// Solver failures and infeasibility are reported through the manifest; configuration
// problems (including unwritable output) throw ConfigError.
RunManifest execute(const ScenarioConfig& config, const CommandOptions& options);

// Parse, execute and map every failure to an exit code. Diagnostics go to `err`.
int run_command(const CommandOptions& options, std::ostream& err);

}  // namespace crossdiff
