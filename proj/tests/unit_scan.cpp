#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qpm/analysis.hpp"
#include "qpm/rng.hpp"
#include "qpm/scan.hpp"

using namespace qpm;

namespace {

/// 5-sigma Poisson band around an expected count.
bool within_poisson(double observed, double expected, double n_sigma = 5.0) {
  const double sigma = std::sqrt(std::max(expected, 1.0));
  return std::abs(observed - expected) <= n_sigma * sigma;
}

std::vector<double> range_deg(double start, double stop, double step) {
  std::vector<double> v;
  for (double a = start; a <= stop + 1e-9; a += step) v.push_back(a);
  return v;
}

}  // namespace

TEST_CASE("oracle: crossed arm gives exactly g2 = 1") {
  Scenario s = default_scenario();
  s.rotating_analyzer_deg = 20.0;  // crossed with the 110 deg sample output
  const ExpectedRates e = expected_rates(s);
  CHECK(e.r_true_hz == doctest::Approx(0.0).epsilon(1e-20));
  CHECK(e.g2_zero == doctest::Approx(1.0));
  CHECK(e.r_a_hz == doctest::Approx(750.0));  // dark + eta * stray
}

TEST_CASE("oracle: defaults with both arms open give g2 well above 10") {
  Scenario s = default_scenario();
  s.rotating_analyzer_deg = 110.0;  // aligned with the sample output
  const ExpectedRates e = expected_rates(s);
  CHECK(e.g2_zero > 10.0);
  CHECK(e.window_fraction > 0.4);
  CHECK(e.window_fraction < 0.5);
}

TEST_CASE("oracle: efficiency scaling cancels when backgrounds vanish") {
  Scenario s = default_scenario();
  s.rotating_analyzer_deg = 110.0;
  s.source.stray_rate_hz = 0.0;
  s.det_a.dark_rate_hz = 0.0;
  s.det_b.dark_rate_hz = 0.0;
  const double g_full = expected_rates(s).g2_zero;
  s.det_a.efficiency *= 0.5;
  s.det_b.efficiency *= 0.5;
  const double g_half = expected_rates(s).g2_zero;
  CHECK(g_full == doctest::Approx(g_half).epsilon(1e-12));
}

TEST_CASE("run_point: simulation matches the oracle within 5 sigma") {
  Scenario s = default_scenario();
  s.rotating_analyzer_deg = 110.0;
  s.integration_time_s = 0.05;
  const ExpectedRates e = expected_rates(s);
  const CorrelationResult r = run_point(s, 4242);
  const double t = s.integration_time_s;

  // The oracle ignores dead time; fold the non-paralyzable correction in.
  const double fa = dead_time_factor(e.r_a_hz, s.det_a.dead_time_ps);
  const double fb = dead_time_factor(e.r_b_hz, s.det_b.dead_time_ps);
  CHECK(within_poisson(static_cast<double>(r.n_a), e.r_a_hz * fa * t));
  CHECK(within_poisson(static_cast<double>(r.n_b), e.r_b_hz * fb * t));
  CHECK(within_poisson(static_cast<double>(r.n_ab), e.r_ab_hz * fa * fb * t));
  REQUIRE(r.g2_valid);
  CHECK(r.g2_zero == doctest::Approx(e.g2_zero).epsilon(0.15));
}

TEST_CASE("run_point: super state stays near the accidental level") {
  Scenario s = default_scenario();
  s.rotating_analyzer_deg = 20.0;
  s.integration_time_s = 0.5;
  const CorrelationResult r = run_point(s, 5151);
  REQUIRE(r.g2_valid);
  CHECK(r.g2_zero < 2.0);
}

TEST_CASE("run_point: quadrupled integration halves the rate scatter") {
  Scenario base = default_scenario();
  base.rotating_analyzer_deg = 110.0;
  base.integration_time_s = 0.005;
  Scenario longer = base;
  longer.integration_time_s = 0.02;

  const auto rel_std = [](const Scenario& s, std::uint64_t tag) {
    const int n = 20;
    std::vector<double> rates;
    rates.reserve(n);
    for (int i = 0; i < n; ++i)
      rates.push_back(run_point(s, derive_seed(tag, "scatter", i)).r_ab_hz);
    double mean = 0.0;
    for (double v : rates) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : rates) var += (v - mean) * (v - mean);
    var /= (n - 1);
    return std::sqrt(var) / mean;
  };
  const double ratio = rel_std(base, 600) / rel_std(longer, 601);
  // expectation is 2 with ~20 samples of spread on either side
  CHECK(ratio > 1.2);
  CHECK(ratio < 3.2);
}

TEST_CASE("sweep: Malus extremes land where arm A is aligned or crossed") {
  Scenario s = default_scenario();
  s.sample.reset();  // bare vertical signal in arm A
  s.integration_time_s = 0.01;
  const SweepTable t = sweep_analyzer(s, range_deg(0.0, 180.0, 2.0), 777);
  const auto max_it = std::max_element(
      t.rows.begin(), t.rows.end(),
      [](const SweepRow& l, const SweepRow& r) { return l.r_ab_hz < r.r_ab_hz; });
  CHECK(std::abs(max_it->analyzer_angle_deg - 90.0) <= 6.0);
  const auto min_it = std::min_element(
      t.rows.begin(), t.rows.end(),
      [](const SweepRow& l, const SweepRow& r) { return l.r_ab_hz < r.r_ab_hz; });
  const double min_angle = min_it->analyzer_angle_deg;
  CHECK((min_angle <= 6.0 || min_angle >= 174.0));
}

TEST_CASE("sweep: defaults show two deep minima with matching g2 dips") {
  Scenario s = default_scenario();
  const std::vector<double> angles = range_deg(0.0, 220.0, 2.0);
  const SweepTable t = sweep_analyzer(s, angles, 31337);
  REQUIRE(t.rows.size() == angles.size());

  const double max_rate =
      std::max_element(t.rows.begin(), t.rows.end(),
                       [](const SweepRow& l, const SweepRow& r) {
                         return l.r_ab_hz < r.r_ab_hz;
                       })
          ->r_ab_hz;

  // contiguous runs below 10% of the maximum; each run is one minimum
  struct Run {
    double lo, hi;
  };
  std::vector<Run> runs;
  bool in_run = false;
  for (const SweepRow& row : t.rows) {
    if (row.r_ab_hz < 0.1 * max_rate) {
      if (!in_run) {
        runs.push_back({row.analyzer_angle_deg, row.analyzer_angle_deg});
        in_run = true;
      } else {
        runs.back().hi = row.analyzer_angle_deg;
      }
    } else {
      in_run = false;
    }
  }
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].lo <= 20.0);
  CHECK(runs[0].hi >= 20.0);
  CHECK(runs[1].lo <= 200.0);
  CHECK(runs[1].hi >= 200.0);

  // g2 dips: values far below the flat level, co-located with the minima
  std::vector<double> g2_values;
  for (const SweepRow& row : t.rows)
    if (row.g2_valid) g2_values.push_back(row.g2_zero);
  std::vector<double> sorted = g2_values;
  std::sort(sorted.begin(), sorted.end());
  const double flat = sorted[sorted.size() * 3 / 4];

  std::vector<XY> g2_points;
  double dip_min = flat;
  for (const SweepRow& row : t.rows) {
    if (!row.g2_valid) continue;
    g2_points.push_back({row.analyzer_angle_deg, row.g2_zero});
    dip_min = std::min(dip_min, row.g2_zero);
  }
  const auto dips = detect_dips(g2_points);
  REQUIRE(dips.size() == 2);
  CHECK(std::abs(dips[0].center_deg - 20.0) <= 4.0);
  CHECK(std::abs(dips[1].center_deg - 200.0) <= 4.0);

  // flat region dominates the dip bottom by more than 10x
  CHECK(flat > 10.0 * dip_min);
}

TEST_CASE("sweep: rejects too-few or non-increasing angle lists") {
  const Scenario s = default_scenario();
  CHECK_THROWS_AS(sweep_analyzer(s, {10.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(sweep_analyzer(s, {10.0, 10.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(sweep_analyzer(s, {20.0, 10.0}, 1), std::invalid_argument);
}

TEST_CASE("sweep: simulated rates track the oracle across angles") {
  Scenario s = default_scenario();
  s.integration_time_s = 0.02;
  const std::vector<double> angles = range_deg(0.0, 220.0, 20.0);
  const SweepTable t = sweep_analyzer(s, angles, 98765);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    Scenario point = s;
    point.rotating_analyzer_deg = angles[i];
    const ExpectedRates e = expected_rates(point);
    const double fa = dead_time_factor(e.r_a_hz, s.det_a.dead_time_ps);
    const double fb = dead_time_factor(e.r_b_hz, s.det_b.dead_time_ps);
    const double tt = s.integration_time_s;
    CHECK(within_poisson(static_cast<double>(t.rows[i].n_a), e.r_a_hz * fa * tt));
    CHECK(within_poisson(static_cast<double>(t.rows[i].n_b), e.r_b_hz * fb * tt));
    CHECK(within_poisson(static_cast<double>(t.rows[i].n_ab),
                         e.r_ab_hz * fa * fb * tt));
  }
}

TEST_CASE("scan_image: grid covers the field and is order-independent") {
  Scenario s = default_scenario();
  s.integration_time_s = 0.002;
  ScanGrid grid;
  grid.width_px = 10;
  grid.height_px = 10;
  grid.pitch_mm = 3.0;
  const ScanImage img1 = scan_image(s, grid, 2025, 1);
  const ScanImage img3 = scan_image(s, grid, 2025, 3);
  CHECK(img1.coincidence_rate_hz == img3.coincidence_rate_hz);
  CHECK(img1.g2_zero.size() == img3.g2_zero.size());
  for (std::size_t p = 0; p < img1.g2_zero.size(); ++p) {
    const bool both_nan =
        std::isnan(img1.g2_zero[p]) && std::isnan(img3.g2_zero[p]);
    CHECK((both_nan || img1.g2_zero[p] == img3.g2_zero[p]));
  }
  CHECK(img1.pixel_x_mm(0) == doctest::Approx(-13.5));
  CHECK(img1.pixel_x_mm(9) == doctest::Approx(13.5));
}

TEST_CASE("scan_image: fully opaque sample sits at the accidental level") {
  Scenario s = default_scenario();
  s.integration_time_s = 0.02;
  s.sample->radius_mm = 1e-6;  // the mount everywhere that matters
  ScanGrid grid;
  grid.width_px = 6;
  grid.height_px = 6;
  grid.pitch_mm = 5.0;
  const ScanImage img = scan_image(s, grid, 888, 1);

  Scenario blocked = s;
  blocked.beam_x_mm = 10.0;
  blocked.beam_y_mm = 10.0;
  const ExpectedRates e = expected_rates(blocked);
  double total_counts = 0.0;
  for (double r : img.coincidence_rate_hz)
    total_counts += r * s.integration_time_s;
  const double expected_counts =
      e.r_ab_hz * s.integration_time_s * static_cast<double>(img.coincidence_rate_hz.size());
  CHECK(within_poisson(total_counts, expected_counts));
}

TEST_CASE("line_profile: degenerate, uniform, and out-of-bounds cases") {
  Scenario s = default_scenario();
  s.sample.reset();
  s.rotating_analyzer_deg = 60.0;
  s.integration_time_s = 0.02;
  ScanGrid grid;
  grid.width_px = 8;
  grid.height_px = 8;
  grid.pitch_mm = 2.0;
  const ScanImage img = scan_image(s, grid, 909, 1);

  const auto single = line_profile(img, 3, 3, 3, 3);
  REQUIRE(single.size() == 1);
  CHECK(single[0].distance_mm == doctest::Approx(0.0));

  // no sample anywhere: a horizontal cut is flat up to counting noise
  const auto row = line_profile(img, 0, 4, 7, 4);
  REQUIRE(row.size() == 8);
  double mean = 0.0;
  for (const auto& p : row) mean += p.coincidence_rate_hz;
  mean /= static_cast<double>(row.size());
  for (const auto& p : row) {
    const double counts = p.coincidence_rate_hz * s.integration_time_s;
    const double expected = mean * s.integration_time_s;
    CHECK(within_poisson(counts, expected));
  }

  CHECK_THROWS_AS(line_profile(img, -1, 0, 3, 3), std::invalid_argument);
  CHECK_THROWS_AS(line_profile(img, 0, 0, 8, 3), std::invalid_argument);
}
