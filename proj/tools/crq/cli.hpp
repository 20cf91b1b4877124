#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace crq::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2 };

/// Self-describing record of one CLI run, written as a JSON sidecar.
struct RunRecord {
  std::string tool = "crq";
  std::string version;
  std::string command;
  std::string started_at;
  std::string finished_at;
  Settings config;  ///< merged settings; replaying them reproduces the results
  nlohmann::json results;

  bool operator==(const RunRecord&) const = default;
};

void to_json(nlohmann::json& j, const RunRecord& r);
void from_json(const nlohmann::json& j, RunRecord& r);

std::string artifact_version();

/// Column order of simulate CSV output. Sweep output appends "status".
const std::vector<std::string>& simulate_csv_columns();

/// Prints the asymptotic characterization of the base point.
RunRecord cmd_characterize(const RunConfig& config, std::ostream& out);

/// Monte Carlo at the base point, or at every grid point. Writes CSV to `csv`.
/// A failure writes a "# FAILED" marker after the completed rows and rethrows.
RunRecord cmd_simulate(const RunConfig& config, std::ostream& csv);

/// Theory (and simulation unless theory_only) over the grid. Failing points
/// are recorded in the status column.
RunRecord cmd_sweep(const RunConfig& config, std::ostream& csv);

/// Full command-line entry point. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crq::cli
