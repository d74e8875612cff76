#ifndef KLEINMETRIC_IO_HPP
#define KLEINMETRIC_IO_HPP

#include <filesystem>
#include <string>

#include <json.hpp>

#include "kleinmetric/evolution.hpp"
#include "kleinmetric/feshbach_villars.hpp"
#include "kleinmetric/lattice.hpp"
#include "kleinmetric/metric.hpp"

namespace kleinmetric::io {

using json = nlohmann::json;

/// Shortest form that still carries 17 significant digits ("%.17g").
std::string format_double(double value);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Row-major array of arrays.
json matrix_to_json(const Matrix<double>& m);
Matrix<double> matrix_from_json(const json& j);

/// {"mode": "per_mode"|"continuous", "alphas": [...], "betas": [...]};
/// unknown keys are a ConfigError.
json metric_params_to_json(const MetricParams<double>& params);
MetricParams<double> metric_params_from_json(const json& j);

/// Complex entries as [re, im] pairs.
json state_to_json(const TwoComponentState<double>& state);

/// Header mode_index,kinetic_eigenvalue,energy_plus,energy_minus; 1-based modes.
std::string spectrum_csv(const KineticSpectrum<double>& spectrum);
json spectrum_json(const KineticSpectrum<double>& spectrum);

/// Header t,theta_norm,naive_norm.
std::string norms_csv(const NormHistory<double>& history);
json norms_json(const NormHistory<double>& history);

/// Header n,h,eigenvalue_error_1..3,fitted_order,theta_condition_number.
/// Missing values (fewer than three modes, no metric) are empty fields.
std::string convergence_csv(const ConvergenceReport& report);
json convergence_json(const ConvergenceReport& report);

}  // namespace kleinmetric::io

#endif  // KLEINMETRIC_IO_HPP
