#ifndef KLEINMETRIC_CLI_HPP
#define KLEINMETRIC_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kleinmetric/config.hpp"

namespace kleinmetric::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInternalError = 1,
  kConfigError = 2,
  kSpectrumError = 3,
  kPositivityFailure = 4,
};

/// Each command validates `cfg` before writing anything into `out_dir`.
/// Library errors are mapped to exit codes by run().
int cmd_spectrum(const RunConfig& cfg, const std::filesystem::path& out_dir);
int cmd_metric_check(const RunConfig& cfg, const std::filesystem::path& out_dir);
int cmd_evolve(const RunConfig& cfg, const std::filesystem::path& out_dir);
int cmd_converge(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Full command line: `kleinmetric <spectrum|metric-check|evolve|converge> [options]`.
/// Diagnostics go to `err` as one line; never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kleinmetric::cli

#endif  // KLEINMETRIC_CLI_HPP
