#include "qpm/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qpm/rng.hpp"

namespace qpm {

std::int64_t Scenario::duration_ps() const {
  return static_cast<std::int64_t>(std::llround(integration_time_s * 1e12));
}

void Scenario::validate() const {
  source.validate();
  det_a.validate();
  det_b.validate();
  if (integration_time_s <= 0.0)
    throw std::invalid_argument("scenario: integration_time_s must be > 0");
  if (window_ps <= 0.0)
    throw std::invalid_argument("scenario: window_ps must be > 0");
  if (!std::isfinite(fixed_analyzer_deg) || !std::isfinite(rotating_analyzer_deg))
    throw std::invalid_argument("scenario: analyzer angles must be finite");
  if (sample) {
    if (sample->order_m < 1)
      throw std::invalid_argument("scenario: sample order_m must be >= 1");
    if (sample->radius_mm <= 0.0)
      throw std::invalid_argument("scenario: sample radius_mm must be > 0");
  }
}

std::pair<double, double> default_beam_position_mm() {
  const double az = deg2rad(200.0);
  return {8.0 * std::cos(az), 8.0 * std::sin(az)};
}

Scenario default_scenario() {
  Scenario s;
  s.sample = SpiralRetarderSample{};
  const auto [bx, by] = default_beam_position_mm();
  s.beam_x_mm = bx;
  s.beam_y_mm = by;
  return s;
}

std::pair<double, double> arm_transmissions(const Scenario& scenario) {
  PolarizationState state_a = vertical_state();    // signal
  PolarizationState state_b = horizontal_state();  // idler
  if (scenario.sample) {
    const SampleElement element = spiral_element_at(
        *scenario.sample, scenario.beam_x_mm, scenario.beam_y_mm);
    if (scenario.sample_arm == Arm::A)
      state_a = apply_element(element, state_a);
    else
      state_b = apply_element(element, state_b);
  }
  const double t_a =
      analyzer_project(state_a, scenario.rotating_analyzer_deg).transmission;
  const double t_b =
      analyzer_project(state_b, scenario.fixed_analyzer_deg).transmission;
  return {t_a, t_b};
}

std::pair<TimeTagStream, TimeTagStream> synthesize_channels(
    const Scenario& scenario, std::uint64_t rng_seed) {
  scenario.validate();
  const std::int64_t duration = scenario.duration_ps();
  const auto [t_a, t_b] = arm_transmissions(scenario);

  auto [signal, idler] = generate_raw_pairs(
      scenario.source, duration, derive_seed(rng_seed, "pairs", 0));

  TimeTagStream arm_a =
      thin_stream(signal, t_a, derive_seed(rng_seed, "thin.a", 0));
  TimeTagStream arm_b =
      thin_stream(idler, t_b, derive_seed(rng_seed, "thin.b", 0));

  // Stray photons bypass the analyzers (unpolarized background folded into
  // a per-arm rate) and are appended before detection.
  const TimeTagStream stray_a = poisson_process_stream(
      scenario.source.stray_rate_hz, duration, derive_seed(rng_seed, "stray.a", 0));
  const TimeTagStream stray_b = poisson_process_stream(
      scenario.source.stray_rate_hz, duration, derive_seed(rng_seed, "stray.b", 0));
  arm_a = TimeTagStream(
      merge_sorted(arm_a.timestamps_ps(), stray_a.timestamps_ps()), duration);
  arm_b = TimeTagStream(
      merge_sorted(arm_b.timestamps_ps(), stray_b.timestamps_ps()), duration);

  TimeTagStream channel_a =
      detect(arm_a, scenario.det_a, duration, derive_seed(rng_seed, "det.a", 0));
  TimeTagStream channel_b =
      detect(arm_b, scenario.det_b, duration, derive_seed(rng_seed, "det.b", 0));
  return {std::move(channel_a), std::move(channel_b)};
}

}  // namespace qpm
