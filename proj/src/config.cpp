#include "qpm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace qpm {

using nlohmann::json;

std::vector<double> SweepConfig::angles() const {
  if (angle_step_deg <= 0.0)
    throw ConfigError("sweep.angle_step_deg must be > 0");
  if (angle_stop_deg <= angle_start_deg)
    throw ConfigError("sweep.angle_stop_deg must exceed angle_start_deg");
  std::vector<double> out;
  const int n = static_cast<int>(
      std::floor((angle_stop_deg - angle_start_deg) / angle_step_deg + 1e-9));
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i)
    out.push_back(angle_start_deg + angle_step_deg * i);
  return out;
}

Config default_config() { return Config{}; }

namespace {

void require_keys(const json& j, const std::string& path,
                  const std::set<std::string>& allowed) {
  if (!j.is_object())
    throw ConfigError(path + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key))
      throw ConfigError(path + ": unknown key '" + key + "'");
  }
}

double get_number(const json& j, const std::string& path, const char* key,
                  double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number())
    throw ConfigError(path + "." + key + ": expected a number");
  return v.get<double>();
}

int get_int(const json& j, const std::string& path, const char* key,
            int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw ConfigError(path + "." + key + ": expected an integer");
  return v.get<int>();
}

std::uint64_t get_u64(const json& j, const std::string& path, const char* key,
                      std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !v.is_number_integer())
    throw ConfigError(path + "." + key + ": expected an unsigned integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < 0)
    throw ConfigError(path + "." + key + ": must be non-negative");
  return v.get<std::uint64_t>();
}

std::pair<double, double> get_xy(const json& j, const std::string& path,
                                 const char* key,
                                 std::pair<double, double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(path + "." + key + ": expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<double> get_number_list(const json& j, const std::string& path,
                                    const char* key,
                                    std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.empty())
    throw ConfigError(path + "." + key + ": expected a non-empty array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw ConfigError(path + "." + key + ": expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

DetectorModel parse_detector(const json& j, const std::string& path,
                             const DetectorModel& def) {
  require_keys(j, path,
               {"efficiency", "dark_rate_hz", "dead_time_ps", "jitter_sigma_ps"});
  DetectorModel d = def;
  d.efficiency = get_number(j, path, "efficiency", def.efficiency);
  d.dark_rate_hz = get_number(j, path, "dark_rate_hz", def.dark_rate_hz);
  d.dead_time_ps = get_number(j, path, "dead_time_ps", def.dead_time_ps);
  d.jitter_sigma_ps = get_number(j, path, "jitter_sigma_ps", def.jitter_sigma_ps);
  return d;
}

json detector_to_json(const DetectorModel& d) {
  return {{"efficiency", d.efficiency},
          {"dark_rate_hz", d.dark_rate_hz},
          {"dead_time_ps", d.dead_time_ps},
          {"jitter_sigma_ps", d.jitter_sigma_ps}};
}

Scenario parse_scenario(const json& j, const Scenario& def) {
  const std::string path = "scenario";
  require_keys(j, path,
               {"source", "detector_a", "detector_b", "sample", "sample_arm",
                "fixed_analyzer_deg", "rotating_analyzer_deg",
                "beam_position_mm", "window_ps", "integration_time_s"});
  Scenario s = def;

  if (j.contains("source")) {
    const json& src = j.at("source");
    require_keys(src, "scenario.source",
                 {"pair_rate_hz", "coherence_time_ps", "pair_jitter_sigma_ps",
                  "stray_rate_hz"});
    s.source.pair_rate_hz =
        get_number(src, "scenario.source", "pair_rate_hz", def.source.pair_rate_hz);
    s.source.coherence_time_ps = get_number(src, "scenario.source",
                                            "coherence_time_ps",
                                            def.source.coherence_time_ps);
    s.source.pair_jitter_sigma_ps =
        get_number(src, "scenario.source", "pair_jitter_sigma_ps",
                   def.source.pair_jitter_sigma_ps);
    s.source.stray_rate_hz =
        get_number(src, "scenario.source", "stray_rate_hz", def.source.stray_rate_hz);
  }
  if (j.contains("detector_a"))
    s.det_a = parse_detector(j.at("detector_a"), "scenario.detector_a", def.det_a);
  if (j.contains("detector_b"))
    s.det_b = parse_detector(j.at("detector_b"), "scenario.detector_b", def.det_b);

  if (j.contains("sample")) {
    const json& sm = j.at("sample");
    require_keys(sm, "scenario.sample",
                 {"present", "order_m", "retardance_deg", "center_mm",
                  "radius_mm", "outside"});
    bool present = def.sample.has_value();
    if (sm.contains("present")) {
      if (!sm.at("present").is_boolean())
        throw ConfigError("scenario.sample.present: expected a boolean");
      present = sm.at("present").get<bool>();
    }
    if (!present) {
      s.sample.reset();
    } else {
      SpiralRetarderSample spiral =
          def.sample.value_or(SpiralRetarderSample{});
      spiral.order_m = get_int(sm, "scenario.sample", "order_m", spiral.order_m);
      spiral.retardance_deg =
          get_number(sm, "scenario.sample", "retardance_deg", spiral.retardance_deg);
      const auto center = get_xy(sm, "scenario.sample", "center_mm",
                                 {spiral.center_x_mm, spiral.center_y_mm});
      spiral.center_x_mm = center.first;
      spiral.center_y_mm = center.second;
      spiral.radius_mm = get_number(sm, "scenario.sample", "radius_mm",
                                    spiral.radius_mm);
      if (sm.contains("outside")) {
        const json& o = sm.at("outside");
        if (!o.is_string())
          throw ConfigError("scenario.sample.outside: expected a string");
        const std::string kind = o.get<std::string>();
        if (kind == "opaque")
          spiral.outside = Opaque{};
        else if (kind == "clear")
          spiral.outside = Clear{};
        else
          throw ConfigError("scenario.sample.outside: must be 'opaque' or 'clear'");
      }
      s.sample = spiral;
    }
  }

  if (j.contains("sample_arm")) {
    const json& arm = j.at("sample_arm");
    if (!arm.is_string() ||
        (arm.get<std::string>() != "A" && arm.get<std::string>() != "B"))
      throw ConfigError("scenario.sample_arm: must be 'A' or 'B'");
    s.sample_arm = arm.get<std::string>() == "A" ? Arm::A : Arm::B;
  }
  s.fixed_analyzer_deg =
      get_number(j, path, "fixed_analyzer_deg", def.fixed_analyzer_deg);
  s.rotating_analyzer_deg =
      get_number(j, path, "rotating_analyzer_deg", def.rotating_analyzer_deg);
  const auto beam = get_xy(j, path, "beam_position_mm",
                           {def.beam_x_mm, def.beam_y_mm});
  s.beam_x_mm = beam.first;
  s.beam_y_mm = beam.second;
  s.window_ps = get_number(j, path, "window_ps", def.window_ps);
  s.integration_time_s =
      get_number(j, path, "integration_time_s", def.integration_time_s);
  return s;
}

json scenario_to_json(const Scenario& s) {
  json sample;
  if (s.sample) {
    std::string outside = "opaque";
    if (std::holds_alternative<Clear>(s.sample->outside)) outside = "clear";
    sample = {{"present", true},
              {"order_m", s.sample->order_m},
              {"retardance_deg", s.sample->retardance_deg},
              {"center_mm", {s.sample->center_x_mm, s.sample->center_y_mm}},
              {"radius_mm", s.sample->radius_mm},
              {"outside", outside}};
  } else {
    sample = {{"present", false}};
  }
  return {{"source",
           {{"pair_rate_hz", s.source.pair_rate_hz},
            {"coherence_time_ps", s.source.coherence_time_ps},
            {"pair_jitter_sigma_ps", s.source.pair_jitter_sigma_ps},
            {"stray_rate_hz", s.source.stray_rate_hz}}},
          {"detector_a", detector_to_json(s.det_a)},
          {"detector_b", detector_to_json(s.det_b)},
          {"sample", sample},
          {"sample_arm", s.sample_arm == Arm::A ? "A" : "B"},
          {"fixed_analyzer_deg", s.fixed_analyzer_deg},
          {"rotating_analyzer_deg", s.rotating_analyzer_deg},
          {"beam_position_mm", {s.beam_x_mm, s.beam_y_mm}},
          {"window_ps", s.window_ps},
          {"integration_time_s", s.integration_time_s}};
}

}  // namespace

Config parse_config(const json& j) {
  require_keys(j, "config",
               {"schema_version", "seed", "scenario", "sweep", "grid",
                "g2curve", "snr"});
  const int version = get_int(j, "config", "schema_version", 1);
  if (version != 1)
    throw ConfigError("config.schema_version: unsupported version " +
                      std::to_string(version));

  Config c = default_config();
  c.seed = get_u64(j, "config", "seed", c.seed);
  if (j.contains("scenario"))
    c.scenario = parse_scenario(j.at("scenario"), c.scenario);

  if (j.contains("sweep")) {
    const json& sw = j.at("sweep");
    require_keys(sw, "sweep",
                 {"angle_start_deg", "angle_stop_deg", "angle_step_deg",
                  "integration_scales"});
    c.sweep.angle_start_deg =
        get_number(sw, "sweep", "angle_start_deg", c.sweep.angle_start_deg);
    c.sweep.angle_stop_deg =
        get_number(sw, "sweep", "angle_stop_deg", c.sweep.angle_stop_deg);
    c.sweep.angle_step_deg =
        get_number(sw, "sweep", "angle_step_deg", c.sweep.angle_step_deg);
    c.sweep.integration_scales = get_number_list(
        sw, "sweep", "integration_scales", c.sweep.integration_scales);
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    require_keys(g, "grid",
                 {"width_px", "height_px", "pitch_mm", "origin_mm"});
    c.grid.width_px = get_int(g, "grid", "width_px", c.grid.width_px);
    c.grid.height_px = get_int(g, "grid", "height_px", c.grid.height_px);
    c.grid.pitch_mm = get_number(g, "grid", "pitch_mm", c.grid.pitch_mm);
    const auto origin =
        get_xy(g, "grid", "origin_mm", {c.grid.origin_x_mm, c.grid.origin_y_mm});
    c.grid.origin_x_mm = origin.first;
    c.grid.origin_y_mm = origin.second;
    if (c.grid.width_px <= 0 || c.grid.height_px <= 0 || c.grid.pitch_mm <= 0.0)
      throw ConfigError("grid: width_px, height_px, pitch_mm must be positive");
  }
  if (j.contains("g2curve")) {
    const json& g = j.at("g2curve");
    require_keys(g, "g2curve",
                 {"hyper_angle_deg", "super_angle_deg", "bin_width_ps",
                  "max_delay_ps", "integration_time_s"});
    c.g2curve.hyper_angle_deg =
        get_number(g, "g2curve", "hyper_angle_deg", c.g2curve.hyper_angle_deg);
    c.g2curve.super_angle_deg =
        get_number(g, "g2curve", "super_angle_deg", c.g2curve.super_angle_deg);
    c.g2curve.bin_width_ps =
        get_number(g, "g2curve", "bin_width_ps", c.g2curve.bin_width_ps);
    c.g2curve.max_delay_ps =
        get_number(g, "g2curve", "max_delay_ps", c.g2curve.max_delay_ps);
    c.g2curve.integration_time_s = get_number(
        g, "g2curve", "integration_time_s", c.g2curve.integration_time_s);
  }
  if (j.contains("snr")) {
    const json& g = j.at("snr");
    require_keys(g, "snr", {"repeats", "integration_scales"});
    c.snr.repeats = get_int(g, "snr", "repeats", c.snr.repeats);
    if (c.snr.repeats < 2)
      throw ConfigError("snr.repeats: need at least 2");
    c.snr.integration_scales = get_number_list(
        g, "snr", "integration_scales", c.snr.integration_scales);
  }

  try {
    c.scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return c;
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte offset; keep its message verbatim.
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_to_json(const Config& c) {
  return {{"schema_version", 1},
          {"seed", c.seed},
          {"scenario", scenario_to_json(c.scenario)},
          {"sweep",
           {{"angle_start_deg", c.sweep.angle_start_deg},
            {"angle_stop_deg", c.sweep.angle_stop_deg},
            {"angle_step_deg", c.sweep.angle_step_deg},
            {"integration_scales", c.sweep.integration_scales}}},
          {"grid",
           {{"width_px", c.grid.width_px},
            {"height_px", c.grid.height_px},
            {"pitch_mm", c.grid.pitch_mm},
            {"origin_mm", {c.grid.origin_x_mm, c.grid.origin_y_mm}}}},
          {"g2curve",
           {{"hyper_angle_deg", c.g2curve.hyper_angle_deg},
            {"super_angle_deg", c.g2curve.super_angle_deg},
            {"bin_width_ps", c.g2curve.bin_width_ps},
            {"max_delay_ps", c.g2curve.max_delay_ps},
            {"integration_time_s", c.g2curve.integration_time_s}}},
          {"snr",
           {{"repeats", c.snr.repeats},
            {"integration_scales", c.snr.integration_scales}}}};
}

}  // namespace qpm
