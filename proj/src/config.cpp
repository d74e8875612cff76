#include "kleinmetric/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "kleinmetric/io.hpp"

namespace kleinmetric {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a table/object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known |= key == a;
    if (!known) throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

double get_number(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 1e9) return static_cast<int>(d);
  }
  throw ConfigError(where + "." + key + " must be an integer");
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

void parse_lattice(const json& j, LatticeConfig<double>& lattice) {
  reject_unknown(j, "lattice", {"n", "h", "mass", "bc"});
  if (j.contains("n")) lattice.n = get_int(j, "n", "lattice");
  if (j.contains("h")) lattice.h = get_number(j, "h", "lattice");
  if (j.contains("mass")) lattice.mass = get_number(j, "mass", "lattice");
  if (j.contains("bc")) {
    const auto bc = get_string(j, "bc", "lattice");
    if (bc == "dirichlet") {
      lattice.bc = BoundaryCondition::Dirichlet;
    } else if (bc == "periodic") {
      lattice.bc = BoundaryCondition::Periodic;
    } else {
      throw ConfigError("lattice.bc must be \"dirichlet\" or \"periodic\"");
    }
  }
}

void parse_evolution(const json& j, EvolutionSpec& evo) {
  reject_unknown(j, "evolution", {"t_max", "steps", "initial", "x0", "sigma", "k0", "mode", "branch"});
  if (j.contains("t_max")) evo.t_max = get_number(j, "t_max", "evolution");
  if (j.contains("steps")) evo.steps = get_int(j, "steps", "evolution");
  if (j.contains("initial")) {
    const auto kind = get_string(j, "initial", "evolution");
    if (kind == "packet") {
      evo.initial = InitialKind::Packet;
    } else if (kind == "eigenstate") {
      evo.initial = InitialKind::Eigenstate;
    } else if (kind == "mixed") {
      evo.initial = InitialKind::Mixed;
    } else {
      throw ConfigError("evolution.initial must be \"packet\", \"eigenstate\" or \"mixed\"");
    }
  }
  if (j.contains("x0")) evo.x0 = get_number(j, "x0", "evolution");
  if (j.contains("sigma")) evo.sigma = get_number(j, "sigma", "evolution");
  if (j.contains("k0")) evo.k0 = get_number(j, "k0", "evolution");
  if (j.contains("mode")) evo.mode = get_int(j, "mode", "evolution");
  if (j.contains("branch")) evo.branch = get_int(j, "branch", "evolution");
}

void parse_convergence(const json& j, ConvergenceSpec& conv) {
  reject_unknown(j, "convergence", {"box_length", "levels"});
  if (j.contains("box_length")) conv.box_length = get_number(j, "box_length", "convergence");
  if (j.contains("levels")) {
    const auto& levels = j["levels"];
    if (!levels.is_array()) throw ConfigError("convergence.levels must be an array of integers");
    conv.levels.clear();
    for (const auto& v : levels) {
      if (!v.is_number_integer()) throw ConfigError("convergence.levels must be an array of integers");
      conv.levels.push_back(v.get<int>());
    }
  }
}

void parse_output(const json& j, OutputSpec& out) {
  reject_unknown(j, "output", {"directory", "format"});
  if (j.contains("directory")) out.directory = get_string(j, "directory", "output");
  if (j.contains("format")) {
    const auto f = get_string(j, "format", "output");
    if (f == "csv") {
      out.format = OutputFormat::Csv;
    } else if (f == "json") {
      out.format = OutputFormat::Json;
    } else {
      throw ConfigError("output.format must be \"csv\" or \"json\"");
    }
  }
}

// --- TOML subset ---

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

json parse_toml_scalar(const std::string& raw, int line_no) {
  const std::string v = trim(raw);
  auto fail = [&]() -> json {
    throw ConfigError("config line " + std::to_string(line_no) + ": cannot parse value \"" + v + "\"");
  };
  if (v.empty()) return fail();
  if ((v.front() == '"' || v.front() == '\'') && v.size() >= 2 && v.back() == v.front())
    return v.substr(1, v.size() - 2);
  if (v == "true") return true;
  if (v == "false") return false;
  const bool integral = v.find_first_of(".eEinfa") == std::string::npos;
  std::size_t used = 0;
  try {
    if (integral) {
      const long long x = std::stoll(v, &used);
      if (used == v.size()) return x;
    } else {
      const double x = std::stod(v, &used);
      if (used == v.size()) return x;
    }
  } catch (const std::exception&) {
  }
  return fail();
}

json parse_toml_value(const std::string& raw, int line_no) {
  const std::string v = trim(raw);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": unterminated array");
    json arr = json::array();
    const std::string body = trim(v.substr(1, v.size() - 2));
    if (body.empty()) return arr;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (trim(item).empty()) continue;  // trailing comma
      arr.push_back(parse_toml_scalar(item, line_no));
    }
    return arr;
  }
  return parse_toml_scalar(v, line_no);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

}  // namespace

json toml_subset_to_json(const std::string& text) {
  json root = json::object();
  json* table = &root;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": malformed table header");
      const std::string name = trim(s.substr(1, s.size() - 2));
      if (!valid_key(name)) throw ConfigError("config line " + std::to_string(line_no) + ": bad table name");
      if (root.contains(name)) throw ConfigError("config: table [" + name + "] defined twice");
      root[name] = json::object();
      table = &root[name];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (!valid_key(key)) throw ConfigError("config line " + std::to_string(line_no) + ": bad key \"" + key + "\"");
    if (table->contains(key)) throw ConfigError("config: key \"" + key + "\" defined twice");
    (*table)[key] = parse_toml_value(s.substr(eq + 1), line_no);
  }
  return root;
}

RunConfig parse_run_config(const std::string& text, bool toml) {
  json j;
  if (toml) {
    j = toml_subset_to_json(text);
  } else {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
  }
  reject_unknown(j, "config", {"lattice", "metric", "evolution", "convergence", "output"});
  RunConfig cfg;
  try {
    if (j.contains("lattice")) parse_lattice(j["lattice"], cfg.lattice);
    if (j.contains("metric")) cfg.metric = io::metric_params_from_json(j["metric"]);
    if (j.contains("evolution")) parse_evolution(j["evolution"], cfg.evolution);
    if (j.contains("convergence")) parse_convergence(j["convergence"], cfg.convergence);
    if (j.contains("output")) parse_output(j["output"], cfg.output);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.extension() == ".toml");
}

MetricParams<double> RunConfig::metric_for(int n) const {
  if (!metric) return MetricParams<double>::identity(n);
  try {
    return metric->broadcast(n);
  } catch (const DimensionMismatch& e) {
    throw ConfigError(e.what());
  }
}

void RunConfig::validate() const {
  lattice.validate();
  if (metric) {
    if (metric->alphas.size() == 0) throw ConfigError("metric: alphas must not be empty");
    for (Eigen::Index i = 0; i < metric->alphas.size(); ++i) {
      if (!std::isfinite(metric->alphas(i)) || !std::isfinite(metric->betas(i)))
        throw ConfigError("metric: parameters must be finite");
    }
    metric_for(lattice.n);
  }
  if (!(evolution.t_max >= 0) || !std::isfinite(evolution.t_max)) throw ConfigError("evolution.t_max must be >= 0");
  if (evolution.steps < 1) throw ConfigError("evolution.steps must be >= 1");
  if (evolution.sigma && !(*evolution.sigma > 0)) throw ConfigError("evolution.sigma must be positive");
  if (evolution.mode < 1 || evolution.mode > lattice.n)
    throw ConfigError("evolution.mode must lie in [1, n]");
  if (evolution.branch != 1 && evolution.branch != -1) throw ConfigError("evolution.branch must be +1 or -1");
  if (!(convergence.box_length > 0)) throw ConfigError("convergence.box_length must be positive");
  if (convergence.levels.empty()) throw ConfigError("convergence.levels must not be empty");
  for (std::size_t i = 0; i < convergence.levels.size(); ++i) {
    if (convergence.levels[i] < 1) throw ConfigError("convergence.levels must be >= 1");
    if (i > 0 && convergence.levels[i] <= convergence.levels[i - 1])
      throw ConfigError("convergence.levels must be strictly increasing");
  }
}

}  // namespace kleinmetric
