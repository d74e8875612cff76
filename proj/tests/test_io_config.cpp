#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kleinmetric/config.hpp"
#include "kleinmetric/io.hpp"

using namespace kleinmetric;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(xs.size());
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("format_double keeps full precision") {
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::format_double(2.0) == "2");
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(io::format_double(std::nan("")) == "nan");
}

TEST_CASE("spectrum_csv rows") {
  const auto s = make_spectrum<double>(vec({1, 3}));
  const auto rows = lines(io::spectrum_csv(s));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "mode_index,kinetic_eigenvalue,energy_plus,energy_minus");
  CHECK(rows[1] == "1,1,1,-1");
  CHECK(rows[2].rfind("2,3,1.7320508075688772,-1.7320508075688772", 0) == 0);
  const auto j = io::spectrum_json(s);
  CHECK(j.size() == 2);
  CHECK(j[1]["energy_minus"].get<double>() == -std::sqrt(3.0));
}

TEST_CASE("matrix json round trip") {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4.5, -6, 1e-300;
  CHECK(io::matrix_from_json(io::matrix_to_json(m)) == m);
  CHECK_THROWS_AS(io::matrix_from_json(nlohmann::json::parse("[[1,2],[3]]")), ConfigError);
}

TEST_CASE("metric params json round trip") {
  const auto p = MetricParams<double>::per_mode(vec({1, 2.5}), vec({0.1, -0.3}));
  const auto back = io::metric_params_from_json(io::metric_params_to_json(p));
  CHECK(back.mode == MetricMode::PerMode);
  CHECK(back.alphas == p.alphas);
  CHECK(back.betas == p.betas);

  const auto c = io::metric_params_from_json(
      nlohmann::json::parse(R"({"mode": "continuous", "alphas": [2], "betas": [0.5]})"));
  CHECK(c.mode == MetricMode::ContinuousForm);
  CHECK(c.alphas(0) == 2.0);

  CHECK_THROWS_AS(io::metric_params_from_json(nlohmann::json::parse(R"({"mode": "per_mode", "alphas": [1],
      "betas": [0], "gamma": 1})")),
                  ConfigError);
  CHECK_THROWS_AS(io::metric_params_from_json(
                      nlohmann::json::parse(R"({"mode": "continuous", "alphas": [1, 2], "betas": [0, 0]})")),
                  ConfigError);
}

TEST_CASE("write_file_atomic creates directories and leaves no temporary") {
  const fs::path dir = fs::temp_directory_path() / "kleinmetric_io_test";
  fs::remove_all(dir);
  io::write_file_atomic(dir / "sub" / "a.txt", "hello\n");
  std::ifstream in(dir / "sub" / "a.txt");
  std::string text;
  std::getline(in, text);
  CHECK(text == "hello");
  CHECK(!fs::exists(dir / "sub" / "a.txt.tmp"));
  fs::remove_all(dir);
}

TEST_CASE("TOML subset") {
  const auto j = toml_subset_to_json(R"(
# comment
[lattice]
n = 16          # trailing comment
h = 0.25
mass = 1.0
bc = "periodic"

[metric]
mode = "continuous"
alphas = [1.0]
betas = [0.5]

[convergence]
levels = [9, 19, 39]
)");
  CHECK(j["lattice"]["n"] == 16);
  CHECK(j["lattice"]["bc"] == "periodic");
  CHECK(j["metric"]["alphas"][0].get<double>() == 1.0);
  CHECK(j["convergence"]["levels"].size() == 3);

  CHECK_THROWS_AS(toml_subset_to_json("[lattice]\nn 16\n"), ConfigError);
}

TEST_CASE("parse_run_config") {
  const auto cfg = parse_run_config(R"({"lattice": {"n": 8, "h": 0.5, "mass": 1},
    "metric": {"mode": "per_mode", "alphas": [1], "betas": [0.2]},
    "evolution": {"t_max": 2, "steps": 4, "initial": "mixed", "mode": 3},
    "output": {"format": "json"}})",
                                    false);
  CHECK(cfg.lattice.n == 8);
  CHECK(cfg.evolution.initial == InitialKind::Mixed);
  CHECK(cfg.output.format == OutputFormat::Json);
  const auto params = cfg.metric_for(8);
  CHECK(params.alphas.size() == 8);
  CHECK(params.betas(7) == 0.2);

  CHECK(parse_run_config("{}", false).metric_for(3).alphas == VectorXd::Ones(3));

  CHECK_THROWS_AS(parse_run_config(R"({"lattice": {"n": 8, "spacing": 1}})", false), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"extra": {}})", false), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"lattice": {"bc": "neumann"}})", false), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[lattice]\nn = 4\nwidth = 2\n", true), ConfigError);

  auto bad = parse_run_config(R"({"lattice": {"n": 4, "h": 0}})", false);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  auto mismatch = parse_run_config(R"({"lattice": {"n": 4},
    "metric": {"mode": "per_mode", "alphas": [1, 2], "betas": [0, 0]}})",
                                   false);
  CHECK_THROWS_AS(mismatch.metric_for(4), ConfigError);
}

TEST_CASE("load_run_config picks the parser by extension") {
  const fs::path dir = fs::temp_directory_path() / "kleinmetric_cfg_test";
  fs::create_directories(dir);
  {
    std::ofstream(dir / "run.toml") << "[lattice]\nn = 5\n";
    std::ofstream(dir / "run.json") << R"({"lattice": {"n": 6}})";
  }
  CHECK(load_run_config(dir / "run.toml").lattice.n == 5);
  CHECK(load_run_config(dir / "run.json").lattice.n == 6);
  CHECK_THROWS_AS(load_run_config(dir / "missing.json"), ConfigError);
  fs::remove_all(dir);
}
