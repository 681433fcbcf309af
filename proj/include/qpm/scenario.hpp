#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "qpm/optics.hpp"
#include "qpm/source.hpp"

namespace qpm {

enum class Arm { A, B };

/// Full experiment description. Channel A is the rotating-analyzer arm and
/// carries the signal photon (vertical); channel B is the fixed-analyzer
/// arm and carries the idler (horizontal). Which arm traverses the sample
/// is configurable; the default (sample in the signal arm) is an assumption,
/// the apparatus description leaves it open.
struct Scenario {
  SourceModel source;
  DetectorModel det_a;
  DetectorModel det_b;
  std::optional<SpiralRetarderSample> sample;
  Arm sample_arm = Arm::A;
  double fixed_analyzer_deg = 0.0;     // arm B
  double rotating_analyzer_deg = 20.0; // arm A
  double beam_x_mm = 0.0;
  double beam_y_mm = 0.0;
  double window_ps = 15000.0;          // full coincidence window
  double integration_time_s = 0.02;

  std::int64_t duration_ps() const;
  void validate() const;
};

/// Default desk-scale scenario: 450 kHz pair source, spiral retarder in
/// arm A with the beam parked at azimuth 200 deg (8 mm off center), so the
/// arm-A polarization leaves the sample at 110 deg. The 110 deg analyzer
/// setting is then the coincidence maximum and 20 deg is fully crossed,
/// giving analyzer-sweep dips at 20 and 200 deg.
Scenario default_scenario();

/// Default beam parking position (azimuth 200 deg, radius 8 mm).
std::pair<double, double> default_beam_position_mm();

/// Per-arm Malus transmissions for the current beam position: arm input
/// polarization, the sample element (sample arm only), then the arm's
/// analyzer.
std::pair<double, double> arm_transmissions(const Scenario& scenario);

/// End-to-end synthesis: source pairs -> sample (one arm) -> analyzers ->
/// stray light -> detectors. Returns (channel A, channel B).
std::pair<TimeTagStream, TimeTagStream> synthesize_channels(
    const Scenario& scenario, std::uint64_t rng_seed);

}  // namespace qpm
