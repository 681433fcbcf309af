#pragma once

#include <string>

#include "qpm/config.hpp"

namespace qpm {

/// Shared command context: resolved configuration, output directory, and
/// the worker count for pixel/angle parallelism.
struct CommandContext {
  Config config;
  std::string out_dir = ".";
  int threads = 1;
};

/// g2(tau) curves at the hyper and super analyzer angles ->
/// g2_curve.csv + g2_curve.meta.json.
void cmd_g2_curve(const CommandContext& ctx);

/// Analyzer sweeps per integration scale -> sweep_<k>.csv files +
/// metrics.json with the per-dip fit table.
void cmd_sweep(const CommandContext& ctx);

/// Raster scan -> scan.csv, scan_coincidence.pgm, scan_g2.pgm,
/// scan.meta.json.
void cmd_scan(const CommandContext& ctx);

/// Line profile over a previously written scan.csv -> profile.csv.
void cmd_profile(const std::string& scan_csv_path, int from_x, int from_y,
                 int to_x, int to_y, const std::string& out_dir);

/// Repeated-point SNR ensembles with and without the sample -> snr.json.
void cmd_snr(const CommandContext& ctx);

/// Simulate the configured scenario and write the two-channel time-tag
/// file ("csv" or "bin").
void cmd_tags_export(const CommandContext& ctx, const std::string& format,
                     const std::string& filename);

/// Validate a time-tag file and print a one-line summary; returns the
/// summary for tests.
std::string cmd_tags_import(const CommandContext& ctx, const std::string& path);

}  // namespace qpm
