#include "kleinmetric/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "kleinmetric/evolution.hpp"
#include "kleinmetric/io.hpp"

namespace kleinmetric::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

void write_table(const fs::path& dir, const std::string& stem, OutputFormat format, const std::string& csv,
                 const json& rows) {
  if (format == OutputFormat::Csv) {
    io::write_file_atomic(dir / (stem + ".csv"), csv);
  } else {
    io::write_file_atomic(dir / (stem + ".json"), rows.dump(2) + "\n");
  }
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

int cmd_spectrum(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  const auto spectrum = kinetic_spectrum(cfg.lattice);
  write_table(out_dir, "spectrum", cfg.output.format, io::spectrum_csv(spectrum), io::spectrum_json(spectrum));
  return kSuccess;
}

int cmd_metric_check(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  const int n = cfg.lattice.n;
  const auto spectrum = kinetic_spectrum(cfg.lattice);
  const auto params = cfg.metric_for(n);
  const auto positivity = check_positivity(params, spectrum);
  const auto modal = solve_dieudonne(spectrum, params);
  const auto site = metric_in_site_basis(modal, spectrum);
  const Matrix<double> k_site = spectrum.kinetic();

  const double residual = dieudonne_residual(build_hamiltonian(k_site), site.theta);
  const double residual_modal =
      dieudonne_residual(build_hamiltonian(Matrix<double>(spectrum.eigenvalues.asDiagonal())), modal.theta);
  const double residual_tol = 2.0 * n * 1e-13;

  const bool positive = positivity.analytic == Verdict::Positive && positivity.numerical;
  std::optional<double> hermiticity;
  std::string hermitize_error;
  if (positive) {
    try {
      const Matrix<double> h = hermitize(k_site, site);
      hermiticity = max_abs(h - h.transpose()) / max_abs(h);
    } catch (const IllConditioned& e) {
      hermitize_error = e.what();
    }
  }
  const double hermiticity_tol = 2.0 * n * 1e-10;
  const bool residuals_pass =
      residual <= residual_tol && (!positive || (hermiticity && *hermiticity <= hermiticity_tol));

  json per_mode = json::array();
  for (int i = 0; i < n; ++i) {
    const double a = spectrum.eigenvalues(i);
    per_mode.push_back({{"mode_index", i + 1},
                        {"kinetic_eigenvalue", a},
                        {"alpha", params.alpha(i)},
                        {"coupling", params.coupling(i, a)},
                        {"verdict", to_string(positivity.per_mode[i])}});
  }

  json report = {
      {"lattice", {{"n", n}, {"h", cfg.lattice.h}, {"mass", cfg.lattice.mass}, {"bc", to_string(cfg.lattice.bc)}}},
      {"metric", io::metric_params_to_json(params)},
      {"positive", positive},
      {"analytic_verdict", to_string(positivity.analytic)},
      {"numerical_positive", positivity.numerical},
      {"verdicts_agree", positivity.agree},
      {"per_mode", per_mode},
      {"dieudonne_residual", residual},
      {"dieudonne_residual_eigenbasis", residual_modal},
      {"dieudonne_tolerance", residual_tol},
      {"hermiticity_residual", hermiticity ? json(*hermiticity) : json(nullptr)},
      {"hermiticity_tolerance", hermiticity_tol},
      {"theta_condition_number", finite_or_null(theta_condition_number(modal))},
      {"residuals_pass", residuals_pass},
  };
  if (!hermitize_error.empty()) report["hermitize_error"] = hermitize_error;
  if (auto witness = negative_norm_witness(modal)) {
    const Vector<double> w = block_rotation(spectrum) * *witness;
    report["negative_norm_witness"] = {{"vector", json(std::vector<double>(w.data(), w.data() + w.size()))},
                                       {"theta_norm", w.dot(site.theta * w)}};
  }
  io::write_file_atomic(out_dir / "metric_report.json", report.dump(2) + "\n");
  return positive && residuals_pass ? kSuccess : kPositivityFailure;
}

int cmd_evolve(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  const auto& lattice = cfg.lattice;
  const auto spectrum = kinetic_spectrum(lattice);
  const auto metric = solve_dieudonne(spectrum, cfg.metric_for(lattice.n));
  if (!metric.positive) throw NotPositive("evolve: metric is not positive definite");

  const auto& evo = cfg.evolution;
  TwoComponentState<double> initial;
  switch (evo.initial) {
    case InitialKind::Packet: {
      const double x0 = evo.x0.value_or(lattice.extent() / 2);
      const double sigma = evo.sigma.value_or(std::max(lattice.extent() / 8, lattice.h));
      initial = gaussian_packet(lattice, x0, sigma, evo.k0, spectrum, metric);
      break;
    }
    case InitialKind::Eigenstate:
      initial = normalize_to_metric(branch_eigenstate(spectrum, evo.mode - 1, evo.branch), metric, spectrum);
      break;
    case InitialKind::Mixed:
      initial = normalize_to_metric(mixed_branch_state(spectrum, evo.mode - 1), metric, spectrum);
      break;
  }

  EvolutionPlan<double> plan{time_grid(evo.t_max, evo.steps), spectrum, initial};
  const auto history = norm_history(plan, metric);
  const auto final_state = evolve(EvolutionPlan<double>{{plan.times.back()}, spectrum, initial}).back();

  write_table(out_dir, "norms", cfg.output.format, io::norms_csv(history), io::norms_json(history));
  json final_json = {{"t", plan.times.back()},
                     {"theta_norm", history.theta_norm.back()},
                     {"naive_norm", history.naive_norm.back()},
                     {"state", io::state_to_json(final_state)}};
  io::write_file_atomic(out_dir / "final_state.json", final_json.dump(2) + "\n");
  return kSuccess;
}

int cmd_converge(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  const auto params = cfg.metric.value_or(MetricParams<double>::identity(1));
  const auto report =
      convergence_study(cfg.convergence.box_length, cfg.lattice.mass, cfg.convergence.levels, params);
  write_table(out_dir, "convergence", cfg.output.format, io::convergence_csv(report), io::convergence_json(report));
  return kSuccess;
}

namespace {

struct Overrides {
  std::string config;
  std::optional<int> n;
  std::optional<double> h, mass, alpha, beta;
  std::optional<std::string> bc, mode, out, format;
  // evolve
  std::optional<double> t_max, x0, sigma, k0;
  std::optional<int> steps, mode_index, branch;
  std::optional<std::string> initial;
  // converge
  std::optional<double> box_length;
  std::optional<std::vector<int>> levels;
};

void add_common_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "JSON or TOML run configuration");
  cmd->add_option("--n", o.n, "number of grid points");
  cmd->add_option("--h", o.h, "grid spacing");
  cmd->add_option("--mass", o.mass, "particle mass");
  cmd->add_option("--bc", o.bc, "boundary condition: dirichlet | periodic");
  cmd->add_option("--alpha", o.alpha, "metric alpha (replicated over modes in per_mode)");
  cmd->add_option("--beta", o.beta, "metric beta (replicated over modes in per_mode)");
  cmd->add_option("--mode", o.mode, "metric mode: per_mode | continuous");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--format", o.format, "table format: csv | json");
}

MetricMode parse_mode(const std::string& s) {
  if (s == "per_mode") return MetricMode::PerMode;
  if (s == "continuous") return MetricMode::ContinuousForm;
  throw ConfigError("--mode must be per_mode or continuous");
}

// Collapses uniform per-mode arrays to one entry so the mode can change.
Vector<double> single_value(const Vector<double>& v, const char* what) {
  if (v.size() == 0 || !(v.array() == v(0)).all())
    throw ConfigError(std::string("--mode: cannot convert non-uniform ") + what + " to another mode");
  return Vector<double>::Constant(1, v(0));
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.n) cfg.lattice.n = *o.n;
  if (o.h) cfg.lattice.h = *o.h;
  if (o.mass) cfg.lattice.mass = *o.mass;
  if (o.bc) {
    if (*o.bc == "dirichlet") {
      cfg.lattice.bc = BoundaryCondition::Dirichlet;
    } else if (*o.bc == "periodic") {
      cfg.lattice.bc = BoundaryCondition::Periodic;
    } else {
      throw ConfigError("--bc must be dirichlet or periodic");
    }
  }
  if (o.mode || o.alpha || o.beta) {
    auto p = cfg.metric.value_or(MetricParams<double>::identity(1));
    if (o.mode) {
      const MetricMode mode = parse_mode(*o.mode);
      if (mode != p.mode) {
        p.alphas = single_value(p.alphas, "alphas");
        p.betas = single_value(p.betas, "betas");
        p.mode = mode;
      }
    }
    if (o.alpha) p.alphas = Vector<double>::Constant(p.alphas.size(), *o.alpha);
    if (o.beta) p.betas = Vector<double>::Constant(p.betas.size(), *o.beta);
    cfg.metric = p;
  }
  if (o.format) {
    if (*o.format == "csv") {
      cfg.output.format = OutputFormat::Csv;
    } else if (*o.format == "json") {
      cfg.output.format = OutputFormat::Json;
    } else {
      throw ConfigError("--format must be csv or json");
    }
  }
  if (o.t_max) cfg.evolution.t_max = *o.t_max;
  if (o.steps) cfg.evolution.steps = *o.steps;
  if (o.x0) cfg.evolution.x0 = *o.x0;
  if (o.sigma) cfg.evolution.sigma = *o.sigma;
  if (o.k0) cfg.evolution.k0 = *o.k0;
  if (o.mode_index) cfg.evolution.mode = *o.mode_index;
  if (o.branch) cfg.evolution.branch = *o.branch;
  if (o.initial) {
    if (*o.initial == "packet") {
      cfg.evolution.initial = InitialKind::Packet;
    } else if (*o.initial == "eigenstate") {
      cfg.evolution.initial = InitialKind::Eigenstate;
    } else if (*o.initial == "mixed") {
      cfg.evolution.initial = InitialKind::Mixed;
    } else {
      throw ConfigError("--initial must be packet, eigenstate or mixed");
    }
  }
  if (o.box_length) cfg.convergence.box_length = *o.box_length;
  if (o.levels) cfg.convergence.levels = *o.levels;
}

// --out, then KLEINMETRIC_OUT, then the config file's output.directory.
fs::path resolve_output_dir(const RunConfig& cfg, const Overrides& o) {
  if (o.out) return *o.out;
  if (const char* env = std::getenv("KLEINMETRIC_OUT"); env && *env) return env;
  return cfg.output.directory;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Metric operators and probability-conserving evolution for the discretized Klein-Gordon equation",
               "kleinmetric"};
  // -h is not a help alias: --h sets the grid spacing
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  Overrides o;

  auto* spectrum = app.add_subcommand("spectrum", "kinetic spectrum and +/- energies -> spectrum.csv");
  auto* metric = app.add_subcommand("metric-check", "metric construction and positivity report -> metric_report.json");
  auto* evolve_cmd = app.add_subcommand("evolve", "norm history under exact evolution -> norms.csv, final_state.json");
  auto* converge = app.add_subcommand("converge", "continuum-limit study -> convergence.csv");
  for (auto* cmd : {spectrum, metric, evolve_cmd, converge}) add_common_options(cmd, o);

  evolve_cmd->add_option("--t-max", o.t_max, "final time");
  evolve_cmd->add_option("--steps", o.steps, "number of time intervals");
  evolve_cmd->add_option("--initial", o.initial, "initial state: packet | eigenstate | mixed");
  evolve_cmd->add_option("--x0", o.x0, "packet centre");
  evolve_cmd->add_option("--sigma", o.sigma, "packet width");
  evolve_cmd->add_option("--k0", o.k0, "packet momentum");
  evolve_cmd->add_option("--mode-index", o.mode_index, "1-based kinetic mode for eigenstate/mixed initial states");
  evolve_cmd->add_option("--branch", o.branch, "energy branch for eigenstate initial states: 1 | -1");
  converge->add_option("--box-length", o.box_length, "box length L (h = L/(n+1))");
  converge->add_option("--levels", o.levels, "increasing grid sizes");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "kleinmetric: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
    apply_overrides(cfg, o);
    cfg.validate();
    const fs::path dir = resolve_output_dir(cfg, o);
    int code = kSuccess;
    if (spectrum->parsed()) {
      code = cmd_spectrum(cfg, dir);
    } else if (metric->parsed()) {
      code = cmd_metric_check(cfg, dir);
    } else if (evolve_cmd->parsed()) {
      code = cmd_evolve(cfg, dir);
    } else {
      code = cmd_converge(cfg, dir);
    }
    if (code == kPositivityFailure) err << "kleinmetric: metric is not positive definite or residual check failed\n";
    return code;
  } catch (const ConfigError& e) {
    err << "kleinmetric: config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DimensionMismatch& e) {
    err << "kleinmetric: config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const BasisMismatch& e) {
    err << "kleinmetric: config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NonPositiveSpectrum& e) {
    err << "kleinmetric: spectrum error: " << e.what() << "\n";
    return kSpectrumError;
  } catch (const NotPositive& e) {
    err << "kleinmetric: positivity failure: " << e.what() << "\n";
    return kPositivityFailure;
  } catch (const std::exception& e) {
    err << "kleinmetric: error: " << e.what() << "\n";
    return kInternalError;
  }
}

}  // namespace kleinmetric::cli
