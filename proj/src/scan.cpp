#include "qpm/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "qpm/rng.hpp"

namespace qpm {

double dead_time_factor(double rate_hz, double dead_time_ps) {
  return 1.0 / (1.0 + rate_hz * dead_time_ps * 1e-12);
}

ExpectedRates expected_rates(const Scenario& scenario) {
  scenario.validate();
  const auto [t_a, t_b] = arm_transmissions(scenario);
  const SourceModel& src = scenario.source;
  const double eta_a = scenario.det_a.efficiency;
  const double eta_b = scenario.det_b.efficiency;

  ExpectedRates e;
  e.r_a_hz = eta_a * src.pair_rate_hz * t_a + scenario.det_a.dark_rate_hz +
             src.stray_rate_hz * eta_a;
  e.r_b_hz = eta_b * src.pair_rate_hz * t_b + scenario.det_b.dark_rate_hz +
             src.stray_rate_hz * eta_b;

  const double sigma2 = src.pair_jitter_sigma_ps * src.pair_jitter_sigma_ps +
                        scenario.det_a.jitter_sigma_ps * scenario.det_a.jitter_sigma_ps +
                        scenario.det_b.jitter_sigma_ps * scenario.det_b.jitter_sigma_ps;
  if (sigma2 > 0.0) {
    const double sigma = std::sqrt(sigma2);
    e.window_fraction = std::erf(scenario.window_ps / 2.0 / (sigma * std::numbers::sqrt2));
  } else {
    e.window_fraction = 1.0;
  }

  e.r_true_hz = src.pair_rate_hz * t_a * t_b * eta_a * eta_b * e.window_fraction;
  const double accidental = e.r_a_hz * e.r_b_hz * scenario.window_ps * 1e-12;
  e.r_ab_hz = e.r_true_hz + accidental;
  e.g2_zero = accidental > 0.0 ? 1.0 + e.r_true_hz / accidental
                               : (e.r_true_hz > 0.0
                                      ? std::numeric_limits<double>::infinity()
                                      : 1.0);
  return e;
}

CorrelationResult run_point(const Scenario& scenario, std::uint64_t seed) {
  auto [a, b] = synthesize_channels(scenario, seed);
  return correlate(a, b, scenario.window_ps, 0.0);
}

SweepTable sweep_analyzer(const Scenario& scenario,
                          const std::vector<double>& angles_deg,
                          std::uint64_t seed) {
  if (angles_deg.size() < 2)
    throw std::invalid_argument("sweep_analyzer: need at least two angles");
  for (std::size_t i = 1; i < angles_deg.size(); ++i)
    if (!(angles_deg[i] > angles_deg[i - 1]))
      throw std::invalid_argument("sweep_analyzer: angles must be strictly increasing");

  SweepTable table;
  table.rows.resize(angles_deg.size());
  for (std::size_t i = 0; i < angles_deg.size(); ++i) {
    Scenario point = scenario;
    point.rotating_analyzer_deg = angles_deg[i];
    const CorrelationResult r = run_point(point, derive_seed(seed, "sweep", i));
    SweepRow& row = table.rows[i];
    row.analyzer_angle_deg = angles_deg[i];
    row.r_ab_hz = r.r_ab_hz;
    row.g2_zero = r.g2_valid ? r.g2_zero : std::numeric_limits<double>::quiet_NaN();
    row.g2_valid = r.g2_valid;
    row.n_a = r.n_a;
    row.n_b = r.n_b;
    row.n_ab = r.n_ab;
  }
  return table;
}

ScanImage scan_image(const Scenario& scenario, const ScanGrid& grid,
                     std::uint64_t seed, int n_threads) {
  if (grid.width_px <= 0 || grid.height_px <= 0 || grid.pitch_mm <= 0.0)
    throw std::invalid_argument("scan_image: degenerate grid");
  scenario.validate();

  ScanImage img;
  img.width_px = grid.width_px;
  img.height_px = grid.height_px;
  img.pitch_mm = grid.pitch_mm;
  img.origin_x_mm = grid.origin_x_mm;
  img.origin_y_mm = grid.origin_y_mm;
  img.seed = seed;
  img.integration_time_s = scenario.integration_time_s;
  img.window_ps = scenario.window_ps;
  const std::size_t n_px = static_cast<std::size_t>(grid.width_px) *
                           static_cast<std::size_t>(grid.height_px);
  img.coincidence_rate_hz.assign(n_px, 0.0);
  img.g2_zero.assign(n_px, 0.0);
  img.g2_valid.assign(n_px, 0);

  const auto run_pixel = [&](std::size_t p) {
    const int ix = static_cast<int>(p % static_cast<std::size_t>(grid.width_px));
    const int iy = static_cast<int>(p / static_cast<std::size_t>(grid.width_px));
    Scenario point = scenario;
    point.beam_x_mm = img.pixel_x_mm(ix);
    point.beam_y_mm = img.pixel_y_mm(iy);
    const CorrelationResult r = run_point(point, derive_seed(seed, "scan", p));
    img.coincidence_rate_hz[p] = r.r_ab_hz;
    if (r.g2_valid) {
      img.g2_zero[p] = r.g2_zero;
      img.g2_valid[p] = 1;
    } else {
      img.g2_zero[p] = std::numeric_limits<double>::quiet_NaN();
    }
  };

  int threads = n_threads;
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 1 || n_px < 2) {
    for (std::size_t p = 0; p < n_px; ++p) run_pixel(p);
  } else {
    // Pixels are seeded individually, so any work split gives the same image.
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(threads, static_cast<int>(n_px));
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t p = next.fetch_add(1);
          if (p >= n_px) return;
          run_pixel(p);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return img;
}

std::vector<ProfileRow> line_profile(const ScanImage& image, int start_x_px,
                                     int start_y_px, int end_x_px,
                                     int end_y_px) {
  const auto inside = [&](int x, int y) {
    return x >= 0 && x < image.width_px && y >= 0 && y < image.height_px;
  };
  if (!inside(start_x_px, start_y_px) || !inside(end_x_px, end_y_px))
    throw std::invalid_argument("line_profile: endpoint outside image");

  const int dx = end_x_px - start_x_px;
  const int dy = end_y_px - start_y_px;
  const int steps = std::max(std::abs(dx), std::abs(dy));
  const double length_mm = std::hypot(static_cast<double>(dx),
                                      static_cast<double>(dy)) * image.pitch_mm;

  std::vector<ProfileRow> rows;
  rows.reserve(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    const double f = steps == 0 ? 0.0
                                : static_cast<double>(i) / static_cast<double>(steps);
    const int x = start_x_px + static_cast<int>(std::lround(f * dx));
    const int y = start_y_px + static_cast<int>(std::lround(f * dy));
    const std::size_t p = image.index(x, y);
    rows.push_back({f * length_mm, image.coincidence_rate_hz[p],
                    image.g2_zero[p], image.g2_valid[p] != 0});
  }
  return rows;
}

}  // namespace qpm
