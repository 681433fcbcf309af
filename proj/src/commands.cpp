#include "qpm/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "qpm/analysis.hpp"
#include "qpm/io.hpp"
#include "qpm/rng.hpp"

namespace qpm {

using nlohmann::json;

namespace {

std::string out_path(const CommandContext& ctx, const std::string& name) {
  std::filesystem::create_directories(ctx.out_dir);
  return (std::filesystem::path(ctx.out_dir) / name).string();
}

std::string config_comment(const Config& c) {
  return "# config: " + config_to_json(c).dump() + "\n";
}

json dip_fit_to_json(const DipFit& f) {
  return {{"y0", f.y0},
          {"a", f.a},
          {"xc_deg", f.xc_deg},
          {"fwhm_deg", f.fwhm_deg},
          {"residual_std_pct", f.residual_std_pct},
          {"converged", f.converged}};
}

json metrics_row_to_json(const MetricsRow& r) {
  json j = {{"integration_time_s", r.integration_time_s},
            {"dip_index", r.dip_index},
            {"present", r.present}};
  if (r.present) {
    j["residual_std_pct"] = r.residual_std_pct;
    j["max_sensitivity_per_deg"] = r.max_sensitivity_per_deg;
    j["max_sensitivity_raw_per_deg"] = r.max_sensitivity_raw_per_deg;
    j["dynamic_range_deg"] = r.dynamic_range_deg;
    j["fit"] = dip_fit_to_json(r.fit);
  }
  return j;
}

json num_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

void cmd_g2_curve(const CommandContext& ctx) {
  const Config& c = ctx.config;
  Scenario base = c.scenario;
  base.integration_time_s = c.g2curve.integration_time_s;

  struct Curve {
    G2Histogram hist;
    CorrelationResult corr;
  };
  const auto run = [&](double angle_deg, std::uint64_t seed) {
    Scenario s = base;
    s.rotating_analyzer_deg = angle_deg;
    auto [a, b] = synthesize_channels(s, seed);
    Curve curve;
    curve.hist = g2_histogram(a, b, c.g2curve.bin_width_ps, c.g2curve.max_delay_ps);
    curve.corr = correlate(a, b, s.window_ps, 0.0);
    return curve;
  };
  const Curve hyper = run(c.g2curve.hyper_angle_deg,
                          derive_seed(c.seed, "g2curve.hyper", 0));
  const Curve super_ = run(c.g2curve.super_angle_deg,
                           derive_seed(c.seed, "g2curve.super", 0));

  std::string csv = config_comment(c);
  csv += "tau_ps,g2_hyper,g2_super\n";
  for (std::size_t i = 0; i < hyper.hist.delays_ps.size(); ++i) {
    csv += format_double(hyper.hist.delays_ps[i]);
    csv += ',';
    csv += format_double(hyper.hist.g2[i]);
    csv += ',';
    csv += format_double(super_.hist.g2[i]);
    csv += '\n';
  }
  write_file_atomic(out_path(ctx, "g2_curve.csv"), csv);

  const auto curve_meta = [](const Curve& curve) {
    return json{{"g2_zero", curve.corr.g2_valid ? json(curve.corr.g2_zero)
                                                : json(nullptr)},
                {"g2_valid", curve.corr.g2_valid},
                {"peak_detected", std::isfinite(curve.hist.peak_fwhm_ps)},
                {"peak_fwhm_ps", num_or_null(curve.hist.peak_fwhm_ps)},
                {"n_a", curve.corr.n_a},
                {"n_b", curve.corr.n_b},
                {"n_ab", curve.corr.n_ab}};
  };
  json meta = {{"config", config_to_json(c)},
               {"hyper", curve_meta(hyper)},
               {"super", curve_meta(super_)}};
  write_file_atomic(out_path(ctx, "g2_curve.meta.json"), meta.dump(2) + "\n");
}

void cmd_sweep(const CommandContext& ctx) {
  const Config& c = ctx.config;
  const std::vector<double> angles = c.sweep.angles();

  std::vector<TimedSweepPoints> fit_inputs;
  json sweeps = json::array();
  for (std::size_t k = 0; k < c.sweep.integration_scales.size(); ++k) {
    const double scale = c.sweep.integration_scales[k];
    if (scale <= 0.0) throw ConfigError("sweep.integration_scales: must be > 0");
    Scenario s = c.scenario;
    s.integration_time_s = c.scenario.integration_time_s * scale;
    const SweepTable table =
        sweep_analyzer(s, angles, derive_seed(c.seed, "sweep.scale", k));

    std::string csv = config_comment(c);
    csv += "# integration_time_s: " + format_double(s.integration_time_s) + "\n";
    csv += "angle_deg,coincidence_rate_hz,g2_zero\n";
    TimedSweepPoints pts;
    pts.integration_time_s = s.integration_time_s;
    for (const SweepRow& row : table.rows) {
      csv += format_double(row.analyzer_angle_deg);
      csv += ',';
      csv += format_double(row.r_ab_hz);
      csv += ',';
      csv += format_double(row.g2_zero);
      csv += '\n';
      if (row.g2_valid) pts.points.push_back({row.analyzer_angle_deg, row.g2_zero});
    }
    const std::string name = "sweep_" + std::to_string(k) + ".csv";
    write_file_atomic(out_path(ctx, name), csv);
    sweeps.push_back({{"index", k},
                      {"scale", scale},
                      {"integration_time_s", s.integration_time_s},
                      {"csv", name}});
    fit_inputs.push_back(std::move(pts));
  }

  const std::vector<MetricsRow> rows = metrics_table(fit_inputs);
  json metrics = json::array();
  for (const MetricsRow& r : rows) metrics.push_back(metrics_row_to_json(r));
  json meta = {{"config", config_to_json(c)},
               {"sweeps", sweeps},
               {"metrics", metrics}};
  write_file_atomic(out_path(ctx, "metrics.json"), meta.dump(2) + "\n");
}

void cmd_scan(const CommandContext& ctx) {
  const Config& c = ctx.config;
  const ScanImage img = scan_image(c.scenario, c.grid, c.seed, ctx.threads);

  std::string csv = config_comment(c);
  csv += "ix,iy,x_mm,y_mm,coincidence_rate_hz,g2_zero,g2_valid\n";
  for (int iy = 0; iy < img.height_px; ++iy) {
    for (int ix = 0; ix < img.width_px; ++ix) {
      const std::size_t p = img.index(ix, iy);
      csv += std::to_string(ix);
      csv += ',';
      csv += std::to_string(iy);
      csv += ',';
      csv += format_double(img.pixel_x_mm(ix));
      csv += ',';
      csv += format_double(img.pixel_y_mm(iy));
      csv += ',';
      csv += format_double(img.coincidence_rate_hz[p]);
      csv += ',';
      csv += format_double(img.g2_zero[p]);
      csv += ',';
      csv += img.g2_valid[p] ? '1' : '0';
      csv += '\n';
    }
  }
  write_file_atomic(out_path(ctx, "scan.csv"), csv);

  const PgmNormalization norm_c = write_pgm16(
      out_path(ctx, "scan_coincidence.pgm"), img.width_px, img.height_px,
      img.coincidence_rate_hz);
  const PgmNormalization norm_g = write_pgm16(
      out_path(ctx, "scan_g2.pgm"), img.width_px, img.height_px, img.g2_zero);

  const auto norm_json = [](const PgmNormalization& n) {
    return json{{"min", n.min}, {"max", n.max}, {"invalid_pixels", n.invalid_pixels}};
  };
  json meta = {{"config", config_to_json(c)},
               {"width_px", img.width_px},
               {"height_px", img.height_px},
               {"pitch_mm", img.pitch_mm},
               {"origin_mm", {img.origin_x_mm, img.origin_y_mm}},
               {"row0_is_ymin", true},
               {"normalization",
                {{"coincidence", norm_json(norm_c)}, {"g2", norm_json(norm_g)}}}};
  write_file_atomic(out_path(ctx, "scan.meta.json"), meta.dump(2) + "\n");
}

namespace {

/// Rebuilds a ScanImage from a scan.csv written by cmd_scan; also returns
/// the scan's config-echo comment line for provenance.
ScanImage read_scan_csv(const std::string& path, std::string* config_line) {
  const std::string data = read_file(path);
  std::istringstream in(data);
  std::string line;
  struct Row {
    int ix, iy;
    double x_mm, y_mm, rate, g2;
    bool valid;
  };
  std::vector<Row> rows;
  int max_ix = -1, max_iy = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# config:", 0) == 0) {
      if (config_line) *config_line = line;
      continue;
    }
    if (line[0] == '#' || line.rfind("ix,", 0) == 0) continue;
    Row r{};
    char valid_ch = '1';
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf,%lf,%c", &r.ix, &r.iy,
                    &r.x_mm, &r.y_mm, &r.rate, &r.g2, &valid_ch) != 7)
      throw IoError("scan csv: malformed row: " + line);
    r.valid = valid_ch == '1';
    max_ix = std::max(max_ix, r.ix);
    max_iy = std::max(max_iy, r.iy);
    rows.push_back(r);
  }
  if (rows.empty()) throw IoError("scan csv: no data rows: " + path);

  ScanImage img;
  img.width_px = max_ix + 1;
  img.height_px = max_iy + 1;
  if (rows.size() != static_cast<std::size_t>(img.width_px) *
                         static_cast<std::size_t>(img.height_px))
    throw IoError("scan csv: incomplete pixel grid: " + path);
  // Recover geometry from the first row's pixel-center coordinates.
  double pitch = 1.0;
  for (const Row& r : rows)
    if (r.ix == 1 && r.iy == 0) pitch = r.x_mm - rows.front().x_mm;
  img.pitch_mm = pitch;
  img.origin_x_mm = rows.front().x_mm - 0.5 * pitch;
  img.origin_y_mm = rows.front().y_mm - 0.5 * pitch;
  const std::size_t n = rows.size();
  img.coincidence_rate_hz.assign(n, 0.0);
  img.g2_zero.assign(n, std::numeric_limits<double>::quiet_NaN());
  img.g2_valid.assign(n, 0);
  for (const Row& r : rows) {
    const std::size_t p = img.index(r.ix, r.iy);
    img.coincidence_rate_hz[p] = r.rate;
    img.g2_zero[p] = r.g2;
    img.g2_valid[p] = r.valid ? 1 : 0;
  }
  return img;
}

}  // namespace

void cmd_profile(const std::string& scan_csv_path, int from_x, int from_y,
                 int to_x, int to_y, const std::string& out_dir) {
  std::string config_line;
  const ScanImage img = read_scan_csv(scan_csv_path, &config_line);
  const std::vector<ProfileRow> rows =
      line_profile(img, from_x, from_y, to_x, to_y);

  std::string csv;
  if (!config_line.empty()) csv = config_line + "\n";
  csv += "# line_px: " + std::to_string(from_x) + "," + std::to_string(from_y) +
         " -> " + std::to_string(to_x) + "," + std::to_string(to_y) + "\n";
  csv += "distance_mm,coincidence_rate_hz,g2_zero\n";
  for (const ProfileRow& r : rows) {
    csv += format_double(r.distance_mm);
    csv += ',';
    csv += format_double(r.coincidence_rate_hz);
    csv += ',';
    csv += format_double(r.g2_zero);
    csv += '\n';
  }
  std::filesystem::create_directories(out_dir);
  write_file_atomic(
      (std::filesystem::path(out_dir) / "profile.csv").string(), csv);
}

void cmd_snr(const CommandContext& ctx) {
  const Config& c = ctx.config;
  Scenario with_sample = c.scenario;
  Scenario without_sample = c.scenario;
  without_sample.sample.reset();

  json results = json::array();
  std::vector<double> snr_values;
  std::vector<double> times;
  for (std::size_t k = 0; k < c.snr.integration_scales.size(); ++k) {
    const double scale = c.snr.integration_scales[k];
    if (scale <= 0.0) throw ConfigError("snr.integration_scales: must be > 0");
    Scenario in_s = without_sample;
    Scenario out_s = with_sample;
    in_s.integration_time_s = c.scenario.integration_time_s * scale;
    out_s.integration_time_s = c.scenario.integration_time_s * scale;

    std::vector<double> s_in, s_out;
    s_in.reserve(static_cast<std::size_t>(c.snr.repeats));
    s_out.reserve(static_cast<std::size_t>(c.snr.repeats));
    for (int i = 0; i < c.snr.repeats; ++i) {
      s_in.push_back(
          run_point(in_s, derive_seed(c.seed, "snr.in", k * 1000 + i)).r_ab_hz);
      s_out.push_back(
          run_point(out_s, derive_seed(c.seed, "snr.out", k * 1000 + i)).r_ab_hz);
    }
    const double value = snr(s_in, s_out);
    snr_values.push_back(value);
    times.push_back(in_s.integration_time_s);
    results.push_back({{"scale", scale},
                       {"integration_time_s", in_s.integration_time_s},
                       {"snr", value},
                       {"n_repeats", c.snr.repeats},
                       {"s_in_rate_hz", s_in},
                       {"s_out_rate_hz", s_out}});
  }

  json meta = {{"config", config_to_json(c)},
               {"results", results},
               // Hardware-dependent published value, printed for reference
               // only; the simulated SNR is not expected to match it.
               {"reference_snr", 19.7},
               {"reference_snr_asserted", false}};
  if (snr_values.size() >= 2 && snr_values.front() > 0.0) {
    const double exponent =
        std::log(snr_values.back() / snr_values.front()) /
        std::log(times.back() / times.front());
    meta["scaling_exponent"] = exponent;
    meta["scaling_exponent_expected"] = 0.5;
  }
  write_file_atomic(out_path(ctx, "snr.json"), meta.dump(2) + "\n");
}

void cmd_tags_export(const CommandContext& ctx, const std::string& format,
                     const std::string& filename) {
  const Config& c = ctx.config;
  auto [a, b] = synthesize_channels(c.scenario, c.seed);
  const TagsFile tags{std::move(a), std::move(b)};
  if (format == "csv")
    write_tags_csv(out_path(ctx, filename), tags);
  else if (format == "bin")
    write_tags_binary(out_path(ctx, filename), tags);
  else
    throw ConfigError("tags export: format must be 'csv' or 'bin'");
}

std::string cmd_tags_import(const CommandContext& ctx, const std::string& path) {
  const TagsFile tags = read_tags(path);
  const CorrelationResult r =
      correlate(tags.channel_a, tags.channel_b, ctx.config.scenario.window_ps, 0.0);
  std::ostringstream out;
  out << "n_a=" << r.n_a << " n_b=" << r.n_b << " n_ab=" << r.n_ab
      << " duration_ps=" << r.duration_ps
      << " window_ps=" << format_double(r.window_ps);
  if (r.g2_valid)
    out << " g2_zero=" << format_double(r.g2_zero);
  else
    out << " g2_zero=undefined";
  return out.str();
}

}  // namespace qpm
