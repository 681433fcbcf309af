#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace qpm {

struct XY {
  double x = 0.0;
  double y = 0.0;
};

/// Thrown when a fit is impossible (degenerate data, zero variance, ...).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gaussian dip model y = y0 + a * exp(-4 ln2 ((x - xc)/fwhm)^2), a < 0
/// for a dip. residual_std_pct is the residual standard deviation as a
/// percentage of the dip depth |a|.
struct DipFit {
  double y0 = 0.0;
  double a = 0.0;
  double xc_deg = 0.0;
  double fwhm_deg = 1.0;
  double residual_std_pct = 0.0;
  bool converged = false;
  std::array<double, 4> param_stderr{};  // (y0, a, xc, fwhm) diagnostics

  double eval(double x_deg) const;
};

/// Damped (Levenberg-Marquardt) least squares with the analytic Jacobian;
/// falls back to a coarse (xc, fwhm) grid search when the first attempt
/// stalls. Auto-initialization when init is absent: xc at the sample
/// minimum, y0 the median of the top quartile, fwhm from the half-depth
/// crossings. Constant data raises FitError; non-convergence returns the
/// best iterate with converged = false.
DipFit fit_gaussian_dip(std::span<const XY> points,
                        const std::optional<DipFit>& init = std::nullopt);

/// Sinusoid c0 + c1 cos(2 (theta - theta0)), angles in degrees, period
/// 180 deg. Solved exactly by linear least squares in {1, cos2t, sin2t}.
struct SinusoidFit {
  double c0 = 0.0;
  double c1 = 0.0;         // >= 0
  double theta0_deg = 0.0; // in [0, 180)
  double rms_residual = 0.0;

  double eval(double theta_deg) const;
};

SinusoidFit fit_sinusoid(std::span<const XY> points);

enum class SensitivityNormalization { Baseline, None };

/// Largest gradient magnitude of the fitted dip, |a| sqrt(8 ln2) e^{-1/2}
/// / fwhm per degree; divided by |y0| under baseline normalization.
double max_sensitivity(const DipFit& fit,
                       SensitivityNormalization norm =
                           SensitivityNormalization::Baseline);

/// Largest gradient magnitude of a fitted sinusoid per degree of analyzer
/// angle, normalized by the sinusoid peak c0 + c1.
double sinusoid_max_gradient(const SinusoidFit& fit);

/// Full width at half depth of one sinusoid lobe in degrees, located
/// numerically on the fitted model (90 deg for any pure cos^2 curve).
double sinusoid_lobe_fwhm_deg(const SinusoidFit& fit);

/// Detected dip: index of the sample minimum plus a crude width estimate
/// used to window the Gaussian fit.
struct DipWindow {
  std::size_t min_index = 0;
  double center_deg = 0.0;
  double est_fwhm_deg = 0.0;
};

/// Local minima below half of the flat level, at least 30 deg apart
/// (deeper minimum wins inside the exclusion range).
std::vector<DipWindow> detect_dips(std::span<const XY> points);

struct MetricsRow {
  double integration_time_s = 0.0;
  int dip_index = 0;
  bool present = false;
  double residual_std_pct = 0.0;
  double max_sensitivity_per_deg = 0.0;      // baseline-normalized
  double max_sensitivity_raw_per_deg = 0.0;  // unnormalized |dy/dx| max
  double dynamic_range_deg = 0.0;            // the fit's FWHM
  DipFit fit;
};

struct TimedSweepPoints {
  double integration_time_s = 0.0;
  std::vector<XY> points;  // (analyzer angle, g2 zero)
};

/// Per integration time and per detected dip: Gaussian fit on a window of
/// +-1.5 estimated FWHM, residual std as % of dip depth, max sensitivity,
/// and dynamic range (= FWHM).
std::vector<MetricsRow> metrics_table(
    std::span<const TimedSweepPoints> sweeps);

/// Eq.-of-merit SNR: |mean(in) - mean(out)| / sqrt(var(in) + var(out)),
/// sample variances with n-1. Needs >= 2 samples per side; zero combined
/// variance raises FitError.
double snr(std::span<const double> s_in, std::span<const double> s_out);

}  // namespace qpm
