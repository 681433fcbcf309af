#pragma once

#include <complex>
#include <variant>

namespace qpm {

/// Angle convention: degrees at all API boundaries, 0 deg = horizontal,
/// counter-clockwise facing the beam. Signal photons are vertical (90 deg),
/// idler photons horizontal (0 deg).
double deg2rad(double deg);

/// Normalize an angle to [0, 360).
double wrap_deg_360(double deg);
/// Normalize an axis angle to [0, 180).
double wrap_deg_180(double deg);

/// Pure polarization state as a complex Jones vector. Amplitudes <= 1
/// encode passive loss; intensity = |e_h|^2 + |e_v|^2.
struct PolarizationState {
  std::complex<double> e_h{0.0, 0.0};
  std::complex<double> e_v{0.0, 0.0};

  double intensity() const { return std::norm(e_h) + std::norm(e_v); }
};

PolarizationState horizontal_state();
PolarizationState vertical_state();
/// Unit-intensity linear polarization at the given angle.
PolarizationState linear_state(double angle_deg);

/// 2x2 complex Jones operator.
struct JonesMatrix {
  std::complex<double> m00{1.0, 0.0}, m01{0.0, 0.0};
  std::complex<double> m10{0.0, 0.0}, m11{1.0, 0.0};

  PolarizationState apply(const PolarizationState& s) const;
  JonesMatrix operator*(const JonesMatrix& rhs) const;

  /// Largest singular value; <= 1 for passive elements, == 1 for unitary.
  double max_singular_value() const;
};

JonesMatrix identity_matrix();

/// Rotated waveplate R(theta) diag(1, e^{-i delta}) R(-theta). The fast
/// axis advances phase; only intensities are observable downstream, so the
/// sign convention is internal but fixed.
JonesMatrix waveplate_matrix(double retardance_deg, double fast_axis_deg);

struct AnalyzerResult {
  double transmission = 0.0;  // Malus transmission probability in [0, 1]
  PolarizationState out_state;
};

/// Project a state onto a linear analyzer axis. transmission =
/// |cos(theta) e_h + sin(theta) e_v|^2.
AnalyzerResult analyzer_project(const PolarizationState& state,
                                double analyzer_angle_deg);

struct Clear {};
struct Opaque {};
struct Retarder {
  double retardance_deg = 180.0;  // in [0, 360)
  double fast_axis_deg = 0.0;     // in [0, 180)
};

Retarder make_retarder(double retardance_deg, double fast_axis_deg);

using SampleElement = std::variant<Clear, Opaque, Retarder>;

PolarizationState apply_element(const SampleElement& element,
                                const PolarizationState& state);

/// Spiral retarder of order m: fast axis at m*phi/2 for azimuth phi, i.e.
/// a half-wave spiral turns linear input into a radial pattern.
struct SpiralRetarderSample {
  int order_m = 1;
  double retardance_deg = 180.0;
  double center_x_mm = 0.0;
  double center_y_mm = 0.0;
  double radius_mm = 12.7;
  SampleElement outside = Opaque{};  // the mount
};

/// Element seen by the beam at a given position. Outside the aperture
/// radius this is the mount; inside, a retarder with fast axis m*phi/2
/// normalized to [0, 180).
SampleElement spiral_element_at(const SpiralRetarderSample& sample,
                                double x_mm, double y_mm);

}  // namespace qpm
