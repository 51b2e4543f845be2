// config.hpp — flat key-value run configuration with sections mirroring the
// module types, preset expansion, and the JSON run manifest.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dwell/model.hpp"
#include "dwell/phasespace.hpp"

namespace dwell {

inline constexpr const char* kVersion = "0.2.0";

// "[section]\nkey = value" text format; keys become "section.key".
using IniMap = std::map<std::string, std::string>;

IniMap parse_ini(const std::string& text);
IniMap load_ini(const std::string& path);

struct GridConfig {
  int nx = 512;
  int np = 512;
  double x_min = -8.0, x_max = 8.0;
  double p_min = -16.0, p_max = 16.0;

  PhaseGrid make() const { return PhaseGrid::make(nx, np, x_min, x_max, p_min, p_max); }
};

// Fully resolved run configuration. All times in driving periods.
struct RunConfig {
  std::string preset_name = "fig1a";
  std::string state = "sea";  // island | sea
  SystemParams sys;
  BathParams bath;
  GridConfig grid;
  GaussianSpec initial;
  double initial_entropy = 0.0;  // H(0); widths inflated at fixed aspect
  double periods = 10.0;
  int steps_per_period = 1000;
  int samples_per_period = 16;
  int ensemble_size = 10000;
  uint64_t seed = 20020521;
  int workers = 2;
  int floquet_n = 40;
  int floquet_nsub = 64;
  int switch_on = 0;

  double dt() const { return sys.tau() / steps_per_period; }

  // Expand `preset` and `state`, then apply explicit keys on top.
  static RunConfig resolve(const IniMap& ini, const std::vector<std::string>& overrides = {});

  // Every resolved key, for the manifest ("auditability of every number").
  IniMap flatten() const;
};

// JSON manifest text: resolved config, code version, and any diagnostics
// the runner appends (as a string map).
std::string manifest_json(const RunConfig& cfg, const std::map<std::string, std::string>& extra);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace dwell
