#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crossdiff/aquifer.hpp"
#include "crossdiff/conditions.hpp"
#include "crossdiff/diagnostics.hpp"
#include "crossdiff/solver.hpp"

namespace crossdiff {

// Shortest text that reads back to the same double.
std::string format_number(double v);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Writes files below a root directory and remembers their relative paths.
// Failure to create or write anything throws ConfigError.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path root);

  void write(const std::string& relative, const std::string& content);
  const std::vector<std::string>& artifacts() const { return artifacts_; }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> artifacts_;
};

std::string snapshot_csv(const Field& f, const Grid& grid, const std::vector<std::string>& names);
std::string series_csv(const SimulationResult& result);
std::string conditions_csv(const std::vector<ConditionReport>& reports);
std::string degiorgi_csv(const DeGiorgiTrace& trace);
std::string balance_csv(const BalanceSeries& balance, const std::vector<std::string>& names);
std::string bounds_csv(const BoundReport& report, const std::vector<std::string>& names, const Grid& grid);
// Interface profile of a heads snapshot: x[,y], h, h1, s = h2 - h1.
std::string profile_csv(const Field& heads, const Grid& grid, double h2);
std::string confinement_csv(const ConfinementReport& report);
std::string sweep_csv(const SweepReport& report);
std::string probe_csv(const UniquenessProbeReport& report, const std::vector<std::string>& names);
std::string probe_summary_csv(const UniquenessProbeReport& report, const std::vector<std::string>& names);
std::string convergence_csv(const ConvergenceTable& table);

// snapshots/snapshot_NNNNN.csv and series.csv.
void write_run(ArtifactWriter& out, const std::string& prefix, const SimulationResult& result, const Grid& grid,
               bool snapshots);

}  // namespace crossdiff
