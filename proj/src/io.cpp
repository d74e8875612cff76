#include "kleinmetric/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace kleinmetric::io {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

json matrix_to_json(const Matrix<double>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix<double> matrix_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("matrix: expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index(0) : static_cast<Eigen::Index>(j.at(0).size());
  Matrix<double> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(i);
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ConfigError("matrix: rows must be arrays of equal length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row.at(c).is_number()) throw ConfigError("matrix: entries must be numbers");
      m(i, c) = row.at(c).get<double>();
    }
  }
  return m;
}

namespace {

Vector<double> number_array(const json& j, const char* key) {
  if (!j.is_array()) throw ConfigError(std::string("metric: \"") + key + "\" must be an array of numbers");
  Vector<double> v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string("metric: \"") + key + "\" must be an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json vector_to_json(const Vector<double>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json complex_vector_to_json(const ComplexVector<double>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(json::array({v(i).real(), v(i).imag()}));
  return out;
}

// Non-finite values have no JSON representation.
json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json metric_params_to_json(const MetricParams<double>& params) {
  return {{"mode", to_string(params.mode)},
          {"alphas", vector_to_json(params.alphas)},
          {"betas", vector_to_json(params.betas)}};
}

MetricParams<double> metric_params_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("metric: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "mode" && key != "alphas" && key != "betas") throw ConfigError("metric: unknown key \"" + key + "\"");
  }
  MetricParams<double> params;
  if (j.contains("mode")) {
    const auto& mode = j["mode"];
    if (mode == "per_mode") {
      params.mode = MetricMode::PerMode;
    } else if (mode == "continuous") {
      params.mode = MetricMode::ContinuousForm;
    } else {
      throw ConfigError("metric: mode must be \"per_mode\" or \"continuous\"");
    }
  }
  if (!j.contains("alphas") || !j.contains("betas")) throw ConfigError("metric: both \"alphas\" and \"betas\" are required");
  params.alphas = number_array(j["alphas"], "alphas");
  params.betas = number_array(j["betas"], "betas");
  if (params.alphas.size() != params.betas.size())
    throw ConfigError("metric: \"alphas\" and \"betas\" must have equal length");
  if (params.mode == MetricMode::ContinuousForm && params.alphas.size() != 1)
    throw ConfigError("metric: continuous mode takes exactly one alpha and one beta");
  return params;
}

json state_to_json(const TwoComponentState<double>& state) {
  return {{"basis", to_string(state.basis())},
          {"n", state.n()},
          {"upper", complex_vector_to_json(state.upper())},
          {"lower", complex_vector_to_json(state.lower())}};
}

std::string spectrum_csv(const KineticSpectrum<double>& spectrum) {
  std::ostringstream out;
  out << "mode_index,kinetic_eigenvalue,energy_plus,energy_minus\n";
  for (int j = 0; j < spectrum.size(); ++j) {
    const double a = spectrum.eigenvalues(j);
    const double e = std::sqrt(a);
    out << j + 1 << ',' << format_double(a) << ',' << format_double(e) << ',' << format_double(-e) << '\n';
  }
  return out.str();
}

json spectrum_json(const KineticSpectrum<double>& spectrum) {
  json rows = json::array();
  for (int j = 0; j < spectrum.size(); ++j) {
    const double a = spectrum.eigenvalues(j);
    rows.push_back({{"mode_index", j + 1},
                    {"kinetic_eigenvalue", a},
                    {"energy_plus", std::sqrt(a)},
                    {"energy_minus", -std::sqrt(a)}});
  }
  return rows;
}

std::string norms_csv(const NormHistory<double>& history) {
  std::ostringstream out;
  out << "t,theta_norm,naive_norm\n";
  for (std::size_t i = 0; i < history.times.size(); ++i) {
    out << format_double(history.times[i]) << ',' << format_double(history.theta_norm[i]) << ','
        << format_double(history.naive_norm[i]) << '\n';
  }
  return out.str();
}

json norms_json(const NormHistory<double>& history) {
  json rows = json::array();
  for (std::size_t i = 0; i < history.times.size(); ++i) {
    rows.push_back({{"t", history.times[i]},
                    {"theta_norm", history.theta_norm[i]},
                    {"naive_norm", history.naive_norm[i]}});
  }
  return rows;
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::ostringstream out;
  out << "n,h,eigenvalue_error_1,eigenvalue_error_2,eigenvalue_error_3,fitted_order,theta_condition_number\n";
  for (const auto& level : report.levels) {
    out << level.n << ',' << format_double(level.h);
    for (std::size_t j = 0; j < 3; ++j) {
      out << ',';
      if (j < level.errors.size()) out << format_double(level.errors[j]);
    }
    out << ',';
    if (std::isfinite(report.fitted_order)) out << format_double(report.fitted_order);
    out << ',';
    if (level.theta_condition_number && std::isfinite(*level.theta_condition_number))
      out << format_double(*level.theta_condition_number);
    out << '\n';
  }
  return out.str();
}

json convergence_json(const ConvergenceReport& report) {
  json rows = json::array();
  for (const auto& level : report.levels) {
    json row = {{"n", level.n}, {"h", level.h}};
    for (std::size_t j = 0; j < 3; ++j) {
      row["eigenvalue_error_" + std::to_string(j + 1)] =
          j < level.errors.size() ? number_or_null(level.errors[j]) : json(nullptr);
    }
    row["fitted_order"] = number_or_null(report.fitted_order);
    row["theta_condition_number"] =
        level.theta_condition_number ? number_or_null(*level.theta_condition_number) : json(nullptr);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace kleinmetric::io
