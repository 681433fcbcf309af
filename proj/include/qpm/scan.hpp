#pragma once

#include <cstdint>
#include <vector>

#include "qpm/correlator.hpp"
#include "qpm/scenario.hpp"

namespace qpm {

/// Closed-form rate oracle for a scenario. Dead time is ignored here
/// (documented approximation, under 2% at the default rates); the
/// simulation-vs-oracle tests fold a non-paralyzable correction in before
/// comparing.
struct ExpectedRates {
  double r_a_hz = 0.0;
  double r_b_hz = 0.0;
  double r_ab_hz = 0.0;   // true + accidental
  double r_true_hz = 0.0; // correlated-pair coincidences inside the window
  double g2_zero = 0.0;
  double window_fraction = 0.0;  // jitter-Gaussian mass inside the window
};

ExpectedRates expected_rates(const Scenario& scenario);

/// Non-paralyzable dead-time factor: measured/true = 1 / (1 + rate * tau).
double dead_time_factor(double rate_hz, double dead_time_ps);

/// One simulated acquisition at the scenario's beam position and analyzer
/// angles: synthesize both channels, then correlate at zero delay.
CorrelationResult run_point(const Scenario& scenario, std::uint64_t seed);

struct SweepRow {
  double analyzer_angle_deg = 0.0;
  double r_ab_hz = 0.0;
  double g2_zero = 0.0;
  bool g2_valid = false;
  std::uint64_t n_a = 0;
  std::uint64_t n_b = 0;
  std::uint64_t n_ab = 0;
};

struct SweepTable {
  std::vector<SweepRow> rows;  // strictly increasing angles
};

/// run_point per analyzer angle with child seeds derived from (seed,
/// "sweep", index). Angles must be strictly increasing, at least two.
SweepTable sweep_analyzer(const Scenario& scenario,
                          const std::vector<double>& angles_deg,
                          std::uint64_t seed);

struct ScanGrid {
  int width_px = 30;
  int height_px = 30;
  double pitch_mm = 1.0;
  double origin_x_mm = -15.0;  // lower-left corner of the field
  double origin_y_mm = -15.0;
};

/// Raster-scan product: coincidence-rate and g2(0) planes plus acquisition
/// metadata. Pixels with an undefined g2 hold NaN and are flagged invalid.
struct ScanImage {
  int width_px = 0;
  int height_px = 0;
  double pitch_mm = 0.0;
  double origin_x_mm = 0.0;
  double origin_y_mm = 0.0;
  std::uint64_t seed = 0;
  double integration_time_s = 0.0;
  double window_ps = 0.0;
  std::vector<double> coincidence_rate_hz;  // row-major, iy * width + ix
  std::vector<double> g2_zero;
  std::vector<std::uint8_t> g2_valid;

  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(width_px) +
           static_cast<std::size_t>(ix);
  }
  double pixel_x_mm(int ix) const {
    return origin_x_mm + (static_cast<double>(ix) + 0.5) * pitch_mm;
  }
  double pixel_y_mm(int iy) const {
    return origin_y_mm + (static_cast<double>(iy) + 0.5) * pitch_mm;
  }
};

/// Raster scan: run_point at every pixel center with per-pixel child seeds,
/// so results are independent of evaluation order. n_threads <= 0 picks the
/// hardware concurrency.
ScanImage scan_image(const Scenario& scenario, const ScanGrid& grid,
                     std::uint64_t seed, int n_threads = 1);

struct ProfileRow {
  double distance_mm = 0.0;
  double coincidence_rate_hz = 0.0;
  double g2_zero = 0.0;
  bool g2_valid = false;
};

/// Nearest-pixel samples along the rasterized segment between two pixel
/// coordinates (inclusive). Endpoints outside the image are rejected.
std::vector<ProfileRow> line_profile(const ScanImage& image, int start_x_px,
                                     int start_y_px, int end_x_px,
                                     int end_y_px);

}  // namespace qpm
