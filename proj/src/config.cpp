#include "dwell/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dwell {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const IniMap& m, const std::string& key, double fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw config_error("config: field '" + key + "' is not a number: '" + it->second + "'");
  }
}

int64_t to_int(const IniMap& m, const std::string& key, int64_t fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  try {
    size_t pos = 0;
    const long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw config_error("config: field '" + key + "' is not an integer: '" + it->second + "'");
  }
}

std::string to_str(const IniMap& m, const std::string& key, const std::string& fallback) {
  auto it = m.find(key);
  return it == m.end() ? fallback : it->second;
}

}  // namespace

IniMap parse_ini(const std::string& text) {
  IniMap map;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw config_error("config: malformed section at line " + std::to_string(lineno));
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw config_error("config: expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key.empty()) throw config_error("config: empty key at line " + std::to_string(lineno));
    map[section.empty() ? key : section + "." + key] = val;
  }
  return map;
}

IniMap load_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str());
}

RunConfig RunConfig::resolve(const IniMap& ini_in, const std::vector<std::string>& overrides) {
  IniMap ini = ini_in;
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw config_error("config: override '" + ov + "' is not key=value");
    ini[trim(ov.substr(0, eq))] = trim(ov.substr(eq + 1));
  }

  RunConfig cfg;
  cfg.preset_name = to_str(ini, "run.preset", "fig1a");
  const Preset pr = preset(cfg.preset_name);
  cfg.sys = pr.sys;
  cfg.bath = pr.bath;
  cfg.state = to_str(ini, "initial.state", "sea");
  if (cfg.state == "island")
    cfg.initial = pr.island;
  else if (cfg.state == "sea")
    cfg.initial = pr.sea;
  else
    throw config_error("config: initial.state must be island or sea, got '" + cfg.state + "'");

  cfg.sys.m = to_double(ini, "system.m", cfg.sys.m);
  cfg.sys.b = to_double(ini, "system.b", cfg.sys.b);
  cfg.sys.a = to_double(ini, "system.a", cfg.sys.a);
  cfg.sys.s = to_double(ini, "system.s", cfg.sys.s);
  cfg.sys.omega = to_double(ini, "system.omega", cfg.sys.omega);
  cfg.sys.hbar = to_double(ini, "system.hbar", cfg.sys.hbar);
  cfg.sys.validate();

  cfg.bath.D = to_double(ini, "bath.D", cfg.bath.D);
  cfg.bath.gamma = to_double(ini, "bath.gamma", cfg.bath.gamma);
  cfg.bath.validate();

  cfg.grid.nx = static_cast<int>(to_int(ini, "grid.nx", cfg.grid.nx));
  cfg.grid.np = static_cast<int>(to_int(ini, "grid.np", cfg.grid.np));
  cfg.grid.x_min = to_double(ini, "grid.x_min", cfg.grid.x_min);
  cfg.grid.x_max = to_double(ini, "grid.x_max", cfg.grid.x_max);
  cfg.grid.p_min = to_double(ini, "grid.p_min", cfg.grid.p_min);
  cfg.grid.p_max = to_double(ini, "grid.p_max", cfg.grid.p_max);
  cfg.grid.make();  // validates

  cfg.initial.x0 = to_double(ini, "initial.x0", cfg.initial.x0);
  cfg.initial.p0 = to_double(ini, "initial.p0", cfg.initial.p0);
  cfg.initial.sigma_x = to_double(ini, "initial.sigma_x", cfg.initial.sigma_x);
  cfg.initial.sigma_p = to_double(ini, "initial.sigma_p", cfg.initial.sigma_p);
  cfg.initial_entropy = to_double(ini, "initial.entropy", 0.0);
  if (cfg.initial_entropy < 0) throw config_error("config: initial.entropy must be >= 0");
  // Mixed states with prescribed H(0): inflate both widths at fixed aspect
  // ratio; purity of a Gaussian is hbar/(2 sx sp) = e^{-H0}.
  if (cfg.initial_entropy > 0) {
    const double g = std::exp(0.5 * cfg.initial_entropy);
    cfg.initial.sigma_x *= g;
    cfg.initial.sigma_p *= g;
  }

  cfg.periods = to_double(ini, "run.periods", cfg.periods);
  cfg.steps_per_period = static_cast<int>(to_int(ini, "run.steps_per_period", cfg.steps_per_period));
  cfg.samples_per_period =
      static_cast<int>(to_int(ini, "run.samples_per_period", cfg.samples_per_period));
  cfg.ensemble_size = static_cast<int>(to_int(ini, "run.ensemble", cfg.ensemble_size));
  cfg.seed = static_cast<uint64_t>(to_int(ini, "run.seed", static_cast<int64_t>(cfg.seed)));
  cfg.workers = static_cast<int>(to_int(ini, "run.workers", cfg.workers));
  cfg.floquet_n = static_cast<int>(to_int(ini, "run.floquet_n", cfg.floquet_n));
  cfg.floquet_nsub = static_cast<int>(to_int(ini, "run.floquet_nsub", cfg.floquet_nsub));
  cfg.switch_on = static_cast<int>(to_int(ini, "run.switch_on", cfg.switch_on));
  if (cfg.periods <= 0 || cfg.steps_per_period < 1 || cfg.samples_per_period < 1)
    throw config_error("config: run.periods/steps_per_period/samples_per_period out of range");
  return cfg;
}

IniMap RunConfig::flatten() const {
  IniMap m;
  auto put = [&](const std::string& k, double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    m[k] = ss.str();
  };
  m["run.preset"] = preset_name;
  m["initial.state"] = state;
  put("system.m", sys.m);
  put("system.b", sys.b);
  put("system.a", sys.a);
  put("system.s", sys.s);
  put("system.omega", sys.omega);
  put("system.hbar", sys.hbar);
  put("bath.D", bath.D);
  put("bath.gamma", bath.gamma);
  m["grid.nx"] = std::to_string(grid.nx);
  m["grid.np"] = std::to_string(grid.np);
  put("grid.x_min", grid.x_min);
  put("grid.x_max", grid.x_max);
  put("grid.p_min", grid.p_min);
  put("grid.p_max", grid.p_max);
  put("initial.x0", initial.x0);
  put("initial.p0", initial.p0);
  put("initial.sigma_x", initial.sigma_x);
  put("initial.sigma_p", initial.sigma_p);
  put("initial.entropy", initial_entropy);
  put("run.periods", periods);
  m["run.steps_per_period"] = std::to_string(steps_per_period);
  m["run.samples_per_period"] = std::to_string(samples_per_period);
  m["run.ensemble"] = std::to_string(ensemble_size);
  m["run.seed"] = std::to_string(seed);
  m["run.workers"] = std::to_string(workers);
  m["run.floquet_n"] = std::to_string(floquet_n);
  m["run.floquet_nsub"] = std::to_string(floquet_nsub);
  m["run.switch_on"] = std::to_string(switch_on);
  return m;
}

std::string manifest_json(const RunConfig& cfg, const std::map<std::string, std::string>& extra) {
  nlohmann::json j;
  j["version"] = kVersion;
  for (const auto& [k, v] : cfg.flatten()) j["config"][k] = v;
  for (const auto& [k, v] : extra) j["diagnostics"][k] = v;
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << text;
}

}  // namespace dwell
