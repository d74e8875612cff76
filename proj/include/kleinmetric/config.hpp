#ifndef KLEINMETRIC_CONFIG_HPP
#define KLEINMETRIC_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kleinmetric/lattice.hpp"
#include "kleinmetric/metric.hpp"

namespace kleinmetric {

enum class OutputFormat { Csv, Json };

enum class InitialKind { Packet, Eigenstate, Mixed };

struct EvolutionSpec {
  double t_max = 10.0;
  int steps = 100;
  InitialKind initial = InitialKind::Packet;
  // Packet; unset values default to the grid centre, an eighth of the extent, zero momentum.
  std::optional<double> x0;
  std::optional<double> sigma;
  double k0 = 0.0;
  // Eigenstate / Mixed: 1-based kinetic mode; Eigenstate also takes the branch sign.
  int mode = 1;
  int branch = 1;
};

struct ConvergenceSpec {
  double box_length = 3.14159265358979323846;
  std::vector<int> levels{9, 19, 39, 79};
};

struct OutputSpec {
  std::filesystem::path directory = ".";
  OutputFormat format = OutputFormat::Csv;
};

/// Everything one CLI invocation needs. `metric` unset means the identity
/// member (alpha_i = 1, beta_i = 0).
struct RunConfig {
  LatticeConfig<double> lattice;
  std::optional<MetricParams<double>> metric;
  EvolutionSpec evolution;
  ConvergenceSpec convergence;
  OutputSpec output;

  /// Checks every nested constraint; throws ConfigError.
  void validate() const;

  /// The metric params for a lattice of n sites. Per-mode params given as a
  /// single (alpha, beta) pair, or with all entries equal, are replicated.
  MetricParams<double> metric_for(int n) const;
};

/// Parses a JSON document, or the TOML subset when `toml` is true. Unknown
/// keys anywhere are rejected.
RunConfig parse_run_config(const std::string& text, bool toml);

/// Reads a config file; `.toml` files use the TOML subset, everything else JSON.
RunConfig load_run_config(const std::filesystem::path& path);

/// Converts the TOML subset used by config files (tables, key = value with
/// strings, numbers, booleans and flat arrays, # comments) to JSON.
nlohmann::json toml_subset_to_json(const std::string& text);

}  // namespace kleinmetric

#endif  // KLEINMETRIC_CONFIG_HPP
