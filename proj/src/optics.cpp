#include "qpm/optics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qpm {

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

double wrap_deg_360(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  return w;
}

double wrap_deg_180(double deg) {
  double w = std::fmod(deg, 180.0);
  if (w < 0.0) w += 180.0;
  return w;
}

PolarizationState horizontal_state() { return {{1.0, 0.0}, {0.0, 0.0}}; }

PolarizationState vertical_state() { return {{0.0, 0.0}, {1.0, 0.0}}; }

PolarizationState linear_state(double angle_deg) {
  const double a = deg2rad(angle_deg);
  return {{std::cos(a), 0.0}, {std::sin(a), 0.0}};
}

PolarizationState JonesMatrix::apply(const PolarizationState& s) const {
  return {m00 * s.e_h + m01 * s.e_v, m10 * s.e_h + m11 * s.e_v};
}

JonesMatrix JonesMatrix::operator*(const JonesMatrix& rhs) const {
  return {m00 * rhs.m00 + m01 * rhs.m10, m00 * rhs.m01 + m01 * rhs.m11,
          m10 * rhs.m00 + m11 * rhs.m10, m10 * rhs.m01 + m11 * rhs.m11};
}

double JonesMatrix::max_singular_value() const {
  // Largest eigenvalue of M^dag M, computed through M^dag M - I so that
  // near-unitary matrices do not lose precision to cancellation.
  const double a1 = std::norm(m00) + std::norm(m10) - 1.0;
  const double d1 = std::norm(m01) + std::norm(m11) - 1.0;
  const std::complex<double> b = std::conj(m00) * m01 + std::conj(m10) * m11;
  const double lambda =
      0.5 * (a1 + d1) + std::hypot(0.5 * (a1 - d1), std::abs(b));
  return std::sqrt(std::max(0.0, 1.0 + lambda));
}

JonesMatrix identity_matrix() { return {}; }

JonesMatrix waveplate_matrix(double retardance_deg, double fast_axis_deg) {
  const double theta = deg2rad(fast_axis_deg);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const std::complex<double> phase =
      std::exp(std::complex<double>(0.0, -deg2rad(retardance_deg)));
  // R(theta) diag(1, phase) R(-theta)
  return {c * c + phase * s * s, c * s * (1.0 - phase),
          c * s * (1.0 - phase), s * s + phase * c * c};
}

AnalyzerResult analyzer_project(const PolarizationState& state,
                                double analyzer_angle_deg) {
  const double a = deg2rad(analyzer_angle_deg);
  const double c = std::cos(a);
  const double s = std::sin(a);
  const std::complex<double> amp = c * state.e_h + s * state.e_v;
  return {std::norm(amp), {amp * c, amp * s}};
}

Retarder make_retarder(double retardance_deg, double fast_axis_deg) {
  return {wrap_deg_360(retardance_deg), wrap_deg_180(fast_axis_deg)};
}

PolarizationState apply_element(const SampleElement& element,
                                const PolarizationState& state) {
  if (std::holds_alternative<Clear>(element)) return state;
  if (std::holds_alternative<Opaque>(element)) return {{0.0, 0.0}, {0.0, 0.0}};
  const auto& r = std::get<Retarder>(element);
  return waveplate_matrix(r.retardance_deg, r.fast_axis_deg).apply(state);
}

SampleElement spiral_element_at(const SpiralRetarderSample& sample,
                                double x_mm, double y_mm) {
  if (sample.order_m < 1)
    throw std::invalid_argument("spiral sample: order_m must be >= 1");
  if (sample.radius_mm <= 0.0)
    throw std::invalid_argument("spiral sample: radius_mm must be > 0");
  const double dx = x_mm - sample.center_x_mm;
  const double dy = y_mm - sample.center_y_mm;
  if (std::hypot(dx, dy) > sample.radius_mm) return sample.outside;
  const double phi = wrap_deg_360(std::atan2(dy, dx) * 180.0 / std::numbers::pi);
  const double fast_axis = wrap_deg_180(sample.order_m * phi / 2.0);
  return make_retarder(sample.retardance_deg, fast_axis);
}

}  // namespace qpm
