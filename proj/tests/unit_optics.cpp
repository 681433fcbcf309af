#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "qpm/optics.hpp"
#include "qpm/rng.hpp"

using namespace qpm;

namespace {

double project_onto_linear(const PolarizationState& s, double angle_deg) {
  return analyzer_project(s, angle_deg).transmission;
}

}  // namespace

TEST_CASE("waveplate: zero retardance is the identity") {
  for (double axis : {0.0, 17.0, 45.0, 120.5}) {
    const JonesMatrix m = waveplate_matrix(0.0, axis);
    CHECK(std::abs(m.m00 - 1.0) < 1e-12);
    CHECK(std::abs(m.m01) < 1e-12);
    CHECK(std::abs(m.m10) < 1e-12);
    CHECK(std::abs(m.m11 - 1.0) < 1e-12);
  }
}

TEST_CASE("waveplate: half-wave at 45 deg swaps H and V") {
  const JonesMatrix m = waveplate_matrix(180.0, 45.0);
  const PolarizationState out = m.apply(horizontal_state());
  CHECK(std::abs(out.e_v) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(out.e_h) < 1e-12);
}

TEST_CASE("waveplate: half-wave at 22.5 deg maps H to 45 deg") {
  // Hand multiplication of the rotated half-wave matrix gives
  // (cos45, sin45) for H input; the 45 deg projection is then unity.
  const JonesMatrix m = waveplate_matrix(180.0, 22.5);
  const PolarizationState out = m.apply(horizontal_state());
  CHECK(project_onto_linear(out, 45.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(project_onto_linear(out, 135.0) < 1e-12);
}

TEST_CASE("analyzer: aligned, crossed, and diagonal projections of V") {
  const PolarizationState v = vertical_state();
  CHECK(analyzer_project(v, 90.0).transmission == doctest::Approx(1.0));
  CHECK(analyzer_project(v, 0.0).transmission == doctest::Approx(0.0));
  CHECK(analyzer_project(v, 45.0).transmission == doctest::Approx(0.5));
}

TEST_CASE("analyzer: output state carries the transmitted intensity") {
  const AnalyzerResult r = analyzer_project(linear_state(30.0), 75.0);
  CHECK(r.out_state.intensity() == doctest::Approx(r.transmission).epsilon(1e-12));
}

TEST_CASE("apply_element: clear, opaque, half-wave") {
  const PolarizationState v = vertical_state();
  CHECK(apply_element(Opaque{}, v).intensity() == doctest::Approx(0.0));
  const PolarizationState s = linear_state(12.0);
  const PolarizationState same = apply_element(Clear{}, s);
  CHECK(std::abs(same.e_h - s.e_h) < 1e-15);
  CHECK(std::abs(same.e_v - s.e_v) < 1e-15);
  const PolarizationState h = apply_element(make_retarder(180.0, 45.0), v);
  CHECK(project_onto_linear(h, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spiral sample: fast axis is half the azimuth for m=1") {
  SpiralRetarderSample sample;
  // azimuth 90 deg -> axis 45 deg
  const SampleElement at90 = spiral_element_at(sample, 0.0, 5.0);
  REQUIRE(std::holds_alternative<Retarder>(at90));
  CHECK(std::get<Retarder>(at90).fast_axis_deg == doctest::Approx(45.0));
  // azimuth 0 -> axis 0
  const SampleElement at0 = spiral_element_at(sample, 5.0, 0.0);
  REQUIRE(std::holds_alternative<Retarder>(at0));
  CHECK(std::get<Retarder>(at0).fast_axis_deg == doctest::Approx(0.0));
  // outside the aperture -> the mount
  const SampleElement outside = spiral_element_at(sample, 20.0, 0.0);
  CHECK(std::holds_alternative<Opaque>(outside));
}

TEST_CASE("property: waveplate matrices are unitary") {
  RandomStream rng(42);
  for (int i = 0; i < 1000; ++i) {
    const double ret = rng.uniform01() * 360.0;
    const double axis = rng.uniform01() * 180.0;
    const JonesMatrix u = waveplate_matrix(ret, axis);
    // U U^dag == I elementwise
    const JonesMatrix udag{std::conj(u.m00), std::conj(u.m10),
                           std::conj(u.m01), std::conj(u.m11)};
    const JonesMatrix prod = u * udag;
    CHECK(std::abs(prod.m00 - 1.0) < 1e-12);
    CHECK(std::abs(prod.m01) < 1e-12);
    CHECK(std::abs(prod.m10) < 1e-12);
    CHECK(std::abs(prod.m11 - 1.0) < 1e-12);
    CHECK(u.max_singular_value() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("property: passive element chains never gain intensity") {
  RandomStream rng(7);
  for (int i = 0; i < 500; ++i) {
    PolarizationState s = linear_state(rng.uniform01() * 360.0);
    const double in = s.intensity();
    for (int k = 0; k < 4; ++k) {
      const double pick = rng.uniform01();
      if (pick < 0.25) {
        s = apply_element(Clear{}, s);
      } else if (pick < 0.4) {
        s = analyzer_project(s, rng.uniform01() * 180.0).out_state;
      } else {
        s = apply_element(
            make_retarder(rng.uniform01() * 360.0, rng.uniform01() * 180.0), s);
      }
    }
    CHECK(s.intensity() <= in + 1e-12);
  }
}

TEST_CASE("property: Malus law for linear states") {
  RandomStream rng(13);
  for (int i = 0; i < 1000; ++i) {
    const double alpha = rng.uniform01() * 360.0;
    const double theta = rng.uniform01() * 360.0;
    const double t = project_onto_linear(linear_state(alpha), theta);
    const double c = std::cos(deg2rad(alpha - theta));
    CHECK(std::abs(t - c * c) < 1e-12);
  }
}

TEST_CASE("property: m=1 half-wave spiral turns V input radial") {
  // For V input at azimuth phi the output is linear at (phi - 90) mod 180:
  // full transmission along that axis, extinction at 90 deg to it.
  SpiralRetarderSample sample;
  for (int phi_deg = 0; phi_deg < 360; ++phi_deg) {
    const double phi = deg2rad(phi_deg);
    const double r = 5.0;
    const SampleElement el =
        spiral_element_at(sample, r * std::cos(phi), r * std::sin(phi));
    const PolarizationState out = apply_element(el, vertical_state());
    const double expected_axis = wrap_deg_180(phi_deg - 90.0);
    CHECK(project_onto_linear(out, expected_axis) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(project_onto_linear(out, expected_axis + 90.0) < 1e-9);
  }
}
