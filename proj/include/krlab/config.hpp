#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace krlab {

/// Parsed run configuration. Fields left unset by the file keep the
/// experiment's defaults.
struct RunConfig {
  std::string experiment;
  std::vector<int> grids;
  std::vector<double> deltas;
  std::vector<double> radii;
  std::vector<int> wavenumbers;
  std::vector<double> perturbations;
  double p = 2.0;
  double q = 2.0;
  std::string cost = "bounded_log";
  std::string field;
  double horizon = 1.0;
  double cfl = 0.5;
  double ode_tolerance = 1e-10;
  int max_frames = 64;
  int instances = 0;
  /// Grid for the a-priori bound in pde-convergence.
  int apriori_grid = 512;
  std::filesystem::path output = "out";
  std::uint64_t seed = 1;
  int jobs = 1;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& origin, int line, std::string key, const std::string& what);
  /// One-based; zero when unknown.
  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

const std::vector<std::string>& experiment_names();
bool is_experiment(const std::string& name);

/// The experiment's default configuration.
RunConfig default_config(const std::string& experiment);

/// YAML text with keys experiment, seed, jobs, output, grid, apriori_grid,
/// horizon, field, cost, instances, exponents {p, q}, sweep {delta, radius,
/// k, r} and solver {cfl, ode_tolerance, max_frames}.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Checks 1/p + 1/q = 1, nonempty sweeps and positive settings.
void validate(const RunConfig& config);

}  // namespace krlab
