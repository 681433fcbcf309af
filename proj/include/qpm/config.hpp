#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpm/scan.hpp"
#include "qpm/scenario.hpp"

namespace qpm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepConfig {
  double angle_start_deg = 0.0;
  double angle_stop_deg = 220.0;
  double angle_step_deg = 2.0;
  std::vector<double> integration_scales{1.0, 2.0, 4.0, 8.0};

  std::vector<double> angles() const;
};

struct G2CurveConfig {
  double hyper_angle_deg = 110.0;
  double super_angle_deg = 20.0;
  double bin_width_ps = 1000.0;
  double max_delay_ps = 100000.0;
  double integration_time_s = 1.0;
};

struct SnrConfig {
  int repeats = 20;
  std::vector<double> integration_scales{1.0, 4.0};
};

/// Full run configuration: the scenario plus per-command controls. All
/// fields carry defaults; parsing is strict (schema version pinned,
/// unknown keys rejected) and the resolved configuration is echoed into
/// every output so a run can be reproduced from its own artifacts.
struct Config {
  std::uint64_t seed = 1;
  Scenario scenario = default_scenario();
  SweepConfig sweep;
  ScanGrid grid;
  G2CurveConfig g2curve;
  SnrConfig snr;
};

Config default_config();

/// Strict parse; throws ConfigError naming the offending JSON path.
Config parse_config(const nlohmann::json& j);

/// Loads and parses a JSON config file; parse errors keep the library's
/// byte-position diagnostics.
Config load_config_file(const std::string& path);

/// Full echo with every default resolved; parse_config(config_to_json(c))
/// reproduces c.
nlohmann::json config_to_json(const Config& c);

}  // namespace qpm
