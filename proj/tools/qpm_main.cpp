#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qpm/analysis.hpp"
#include "qpm/commands.hpp"
#include "qpm/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct ParsedXY {
  int x = 0;
  int y = 0;
};

bool parse_px(const std::string& s, ParsedXY* out) {
  return std::sscanf(s.c_str(), "%d,%d", &out->x, &out->y) == 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum polarization microscope simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  int threads = 1;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed_override, "Master seed (overrides config)")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--threads", threads,
                 "Worker threads for pixel/angle loops (0 = hardware)");

  auto* sub_g2 = app.add_subcommand(
      "g2-curve", "g2(tau) curves at the hyper/super analyzer angles");
  auto* sub_sweep =
      app.add_subcommand("sweep", "Analyzer sweep tables and dip metrics");
  auto* sub_scan = app.add_subcommand("scan", "Raster-scan images");

  auto* sub_profile =
      app.add_subcommand("profile", "Line profile across a scan.csv");
  std::string scan_csv;
  std::string from_px = "0,0";
  std::string to_px = "0,0";
  sub_profile->add_option("--scan", scan_csv, "Path to scan.csv")->required();
  sub_profile->add_option("--from", from_px, "Start pixel ix,iy")->required();
  sub_profile->add_option("--to", to_px, "End pixel ix,iy")->required();

  auto* sub_snr =
      app.add_subcommand("snr", "Repeated-point SNR with/without the sample");

  auto* sub_tags = app.add_subcommand("tags", "Time-tag file export/import");
  sub_tags->require_subcommand(1);
  auto* tags_export = sub_tags->add_subcommand("export", "Simulate and write tags");
  std::string tags_format = "csv";
  std::string tags_file;
  tags_export->add_option("--format", tags_format, "csv or bin");
  tags_export->add_option("--file", tags_file, "Output file name");
  auto* tags_import = sub_tags->add_subcommand("import", "Validate and summarize");
  std::string tags_in_path;
  tags_import->add_option("file", tags_in_path, "Tags file to read")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    qpm::CommandContext ctx;
    ctx.config = config_path.empty() ? qpm::default_config()
                                     : qpm::load_config_file(config_path);
    if (seed_given) ctx.config.seed = seed_override;
    ctx.out_dir = out_dir;
    ctx.threads = threads;

    if (*sub_g2) {
      qpm::cmd_g2_curve(ctx);
    } else if (*sub_sweep) {
      qpm::cmd_sweep(ctx);
    } else if (*sub_scan) {
      qpm::cmd_scan(ctx);
    } else if (*sub_profile) {
      ParsedXY from, to;
      if (!parse_px(from_px, &from) || !parse_px(to_px, &to)) {
        std::cerr << "profile: --from/--to must be ix,iy\n";
        return kExitConfig;
      }
      qpm::cmd_profile(scan_csv, from.x, from.y, to.x, to.y, out_dir);
    } else if (*sub_snr) {
      qpm::cmd_snr(ctx);
    } else if (*sub_tags) {
      if (*tags_export) {
        if (tags_file.empty())
          tags_file = tags_format == "bin" ? "tags.qtt" : "tags.csv";
        qpm::cmd_tags_export(ctx, tags_format, tags_file);
      } else {
        std::cout << qpm::cmd_tags_import(ctx, tags_in_path) << "\n";
      }
    }
    return kExitOk;
  } catch (const qpm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qpm::FitError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const qpm::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
