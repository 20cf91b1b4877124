#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crq/mc_simulator.hpp"

namespace crq::cli {

/// Raw key -> value settings, from a config file and/or flags.
using Settings = std::map<std::string, std::string>;

/// Parses `key = value` lines. '#' starts a comment; blank lines are skipped.
/// Repeated `grid` keys accumulate, separated by ';'.
Settings parse_key_value(std::istream& in);
Settings load_key_value_file(const std::string& path);

/// Writes settings back in the format parse_key_value() reads.
void write_key_value(std::ostream& out, const Settings& settings);

/// Overlays `flags` onto `file`. A flag that sets one member of the
/// {sigma2, snr_db} pair removes the other member coming from the file.
Settings merge(Settings file, const Settings& flags);

struct GridAxis {
  std::string key;  ///< rho | lambda | snr_db | delta
  std::vector<double> values;
};

/// Parses "key=lo:hi:step" or "key=v1,v2,..." into an axis.
GridAxis parse_grid_axis(const std::string& spec);

/// Fully resolved run configuration.
struct RunConfig {
  std::optional<int> n;
  std::optional<int> k;
  double delta = 0.0;
  std::optional<double> snr_db;  ///< set when the noise level was given in dB
  double sigma2 = 0.0;
  std::optional<double> rho;
  std::optional<double> lambda;
  bool squid = false;
  SolverBackend solver = SolverBackend::Convex;
  long long trials = 0;
  std::uint64_t seed = 1;
  std::string out;
  bool theory_only = false;
  unsigned threads = 0;
  std::vector<GridAxis> grid;

  Settings echo;  ///< the merged settings this config was resolved from

  /// Asymptotic model for the base point.
  [[nodiscard]] ModelParams model() const;
  /// Finite-size system for the base point; needs N and K.
  [[nodiscard]] SystemConfig system() const;
};

/// Validates and resolves merged settings. Throws ConfigError.
RunConfig resolve(const Settings& settings);

/// One concrete grid point derived from a RunConfig.
struct GridPoint {
  double snr_db = 0.0;  ///< NaN when the noise level was given as sigma2
  RunConfig config;
};

/// Cartesian product of the grid axes (first axis outermost); one point if no grid.
std::vector<GridPoint> expand_grid(const RunConfig& config);

}  // namespace crq::cli
