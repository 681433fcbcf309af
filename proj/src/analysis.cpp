#include "qpm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qpm/optics.hpp"

namespace qpm {

namespace {

constexpr double kFourLn2 = 4.0 * std::numbers::ln2;
constexpr int kMaxIterations = 200;
constexpr double kConvergenceTol = 1e-8;

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lo = *std::max_element(v.begin(), v.begin() + mid);
    m = 0.5 * (m + lo);
  }
  return m;
}

/// Median of the top quartile of y; the dip fit's baseline estimate.
double flat_level(std::span<const XY> points) {
  std::vector<double> y;
  y.reserve(points.size());
  for (const auto& p : points) y.push_back(p.y);
  std::sort(y.begin(), y.end());
  const std::size_t q = std::max<std::size_t>(1, y.size() / 4);
  return median(std::vector<double>(y.end() - q, y.end()));
}

struct LinSolveResult {
  std::array<double, 4> x{};
  bool ok = false;
};

/// Gaussian elimination with partial pivoting for an n x n system (n <= 4).
LinSolveResult solve_small(std::array<std::array<double, 4>, 4> m,
                           std::array<double, 4> rhs, int n) {
  LinSolveResult res;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    if (std::abs(m[pivot][col]) < 1e-300) return res;
    std::swap(m[col], m[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (int r = col + 1; r < n; ++r) {
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < n; ++c) m[r][c] -= f * m[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int c = r + 1; c < n; ++c) s -= m[r][c] * res.x[c];
    res.x[r] = s / m[r][r];
  }
  res.ok = true;
  return res;
}

struct DipParams {
  double y0, a, xc, fwhm;
};

double dip_model(const DipParams& p, double x) {
  const double u = (x - p.xc) / p.fwhm;
  return p.y0 + p.a * std::exp(-kFourLn2 * u * u);
}

double dip_ssr(const DipParams& p, std::span<const XY> pts) {
  double s = 0.0;
  for (const auto& q : pts) {
    const double r = dip_model(p, q.x) - q.y;
    s += r * r;
  }
  return s;
}

/// One damped Gauss-Newton pass. Returns the best parameters found and
/// whether the relative-step convergence criterion fired.
struct LmOutcome {
  DipParams p;
  bool converged = false;
  double ssr = 0.0;
};

LmOutcome lm_minimize(DipParams p, std::span<const XY> pts) {
  double lambda = 1e-3;
  double ssr = dip_ssr(p, pts);
  bool converged = false;

  for (int iter = 0; iter < kMaxIterations && !converged; ++iter) {
    // Normal equations from the analytic Jacobian.
    std::array<std::array<double, 4>, 4> jtj{};
    std::array<double, 4> jtr{};
    for (const auto& q : pts) {
      const double u = (q.x - p.xc) / p.fwhm;
      const double e = std::exp(-kFourLn2 * u * u);
      const double r = p.y0 + p.a * e - q.y;
      const std::array<double, 4> row = {
          1.0, e, p.a * e * 2.0 * kFourLn2 * u / p.fwhm,
          p.a * e * 2.0 * kFourLn2 * u * u / p.fwhm};
      for (int i = 0; i < 4; ++i) {
        jtr[i] += row[i] * r;
        for (int j = i; j < 4; ++j) jtj[i][j] += row[i] * row[j];
      }
    }
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < i; ++j) jtj[i][j] = jtj[j][i];

    bool stepped = false;
    for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
      auto damped = jtj;
      for (int i = 0; i < 4; ++i)
        damped[i][i] += lambda * std::max(jtj[i][i], 1e-12);
      std::array<double, 4> rhs = {-jtr[0], -jtr[1], -jtr[2], -jtr[3]};
      const LinSolveResult sol = solve_small(damped, rhs, 4);
      if (sol.ok) {
        DipParams trial{p.y0 + sol.x[0], p.a + sol.x[1], p.xc + sol.x[2],
                        p.fwhm + sol.x[3]};
        if (trial.fwhm > 0.0) {
          const double trial_ssr = dip_ssr(trial, pts);
          if (trial_ssr <= ssr) {
            const std::array<double, 4> cur = {p.y0, p.a, p.xc, p.fwhm};
            double rel = 0.0;
            for (int i = 0; i < 4; ++i)
              rel = std::max(rel, std::abs(sol.x[i]) /
                                      std::max(std::abs(cur[i]), 1e-12));
            p = trial;
            ssr = trial_ssr;
            lambda = std::max(lambda / 3.0, 1e-12);
            stepped = true;
            if (rel < kConvergenceTol) converged = true;
          }
        }
      }
      if (!stepped) lambda *= 10.0;
    }
    if (!stepped) break;  // damping exhausted
  }
  return {p, converged, ssr};
}

/// Linear least squares for (y0, a) at fixed (xc, fwhm); used by the
/// coarse-grid fallback initialization.
double best_linear_ssr(std::span<const XY> pts, double xc, double fwhm,
                       double* y0_out, double* a_out) {
  double se = 0.0, see = 0.0, sy = 0.0, sey = 0.0;
  const auto n = static_cast<double>(pts.size());
  for (const auto& q : pts) {
    const double u = (q.x - xc) / fwhm;
    const double e = std::exp(-kFourLn2 * u * u);
    se += e;
    see += e * e;
    sy += q.y;
    sey += e * q.y;
  }
  const double det = n * see - se * se;
  if (std::abs(det) < 1e-300) return std::numeric_limits<double>::infinity();
  const double y0 = (see * sy - se * sey) / det;
  const double a = (n * sey - se * sy) / det;
  *y0_out = y0;
  *a_out = a;
  return dip_ssr({y0, a, xc, fwhm}, pts);
}

/// Half-depth width around the sample minimum, by linear interpolation.
double estimate_fwhm(std::span<const XY> pts, std::size_t min_idx,
                     double base_level) {
  const double ymin = pts[min_idx].y;
  const double half = 0.5 * (base_level + ymin);
  double left = std::numeric_limits<double>::quiet_NaN();
  double right = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = min_idx; i-- > 0;) {
    if (pts[i].y >= half) {
      const double f = (half - pts[i + 1].y) / (pts[i].y - pts[i + 1].y);
      left = pts[i + 1].x - f * (pts[i + 1].x - pts[i].x);
      break;
    }
  }
  for (std::size_t i = min_idx + 1; i < pts.size(); ++i) {
    if (pts[i].y >= half) {
      const double f = (half - pts[i - 1].y) / (pts[i].y - pts[i - 1].y);
      right = pts[i - 1].x + f * (pts[i].x - pts[i - 1].x);
      break;
    }
  }
  const double xc = pts[min_idx].x;
  if (std::isnan(left) && std::isnan(right))
    return (pts.back().x - pts.front().x) / 4.0;
  if (std::isnan(left)) return 2.0 * (right - xc);
  if (std::isnan(right)) return 2.0 * (xc - left);
  return right - left;
}

}  // namespace

double DipFit::eval(double x_deg) const {
  const double u = (x_deg - xc_deg) / fwhm_deg;
  return y0 + a * std::exp(-kFourLn2 * u * u);
}

DipFit fit_gaussian_dip(std::span<const XY> points,
                        const std::optional<DipFit>& init) {
  if (points.size() < 5)
    throw std::invalid_argument("fit_gaussian_dip: need at least 5 points");
  std::vector<XY> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(),
            [](const XY& l, const XY& r) { return l.x < r.x; });

  const auto [min_it, max_it] = std::minmax_element(
      pts.begin(), pts.end(), [](const XY& l, const XY& r) { return l.y < r.y; });
  const double spread = max_it->y - min_it->y;
  if (spread <= 0.0 ||
      spread < 1e-12 * std::max(1.0, std::abs(max_it->y)))
    throw FitError("fit_gaussian_dip: constant data, fit impossible");

  DipParams p{};
  if (init) {
    p = {init->y0, init->a, init->xc_deg, init->fwhm_deg};
    if (p.fwhm <= 0.0)
      throw std::invalid_argument("fit_gaussian_dip: init fwhm must be > 0");
  } else {
    const auto min_idx = static_cast<std::size_t>(min_it - pts.begin());
    p.y0 = flat_level(pts);
    p.a = min_it->y - p.y0;
    p.xc = min_it->x;
    p.fwhm = std::max(estimate_fwhm(pts, min_idx, p.y0), 1e-6);
  }

  LmOutcome out = lm_minimize(p, pts);
  if (!out.converged) {
    // Coarse grid over (xc, fwhm) with exact linear (y0, a) per node.
    const double span = pts.back().x - pts.front().x;
    double best_ssr = out.ssr;
    DipParams best = out.p;
    for (int ix = 0; ix <= 60; ++ix) {
      const double xc = pts.front().x + span * ix / 60.0;
      for (int iw = 0; iw < 30; ++iw) {
        const double fwhm = span * std::pow(10.0, -2.0 + 2.0 * iw / 29.0);
        double y0 = 0.0, a = 0.0;
        const double ssr = best_linear_ssr(pts, xc, fwhm, &y0, &a);
        if (ssr < best_ssr) {
          best_ssr = ssr;
          best = {y0, a, xc, fwhm};
        }
      }
    }
    const LmOutcome retry = lm_minimize(best, pts);
    if (retry.ssr <= out.ssr) out = retry;
  }

  DipFit fit;
  fit.y0 = out.p.y0;
  fit.a = out.p.a;
  fit.xc_deg = out.p.xc;
  fit.fwhm_deg = out.p.fwhm;
  fit.converged = out.converged;

  // Residual spread relative to the dip depth, plus covariance diagnostics.
  std::vector<double> residuals;
  residuals.reserve(pts.size());
  double mean_r = 0.0;
  for (const auto& q : pts) {
    const double r = fit.eval(q.x) - q.y;
    residuals.push_back(r);
    mean_r += r;
  }
  mean_r /= static_cast<double>(residuals.size());
  double var_r = 0.0;
  for (double r : residuals) var_r += (r - mean_r) * (r - mean_r);
  var_r /= static_cast<double>(residuals.size() - 1);
  fit.residual_std_pct =
      std::abs(fit.a) > 0.0 ? 100.0 * std::sqrt(var_r) / std::abs(fit.a) : 0.0;

  if (pts.size() > 4) {
    std::array<std::array<double, 4>, 4> jtj{};
    for (const auto& q : pts) {
      const double u = (q.x - fit.xc_deg) / fit.fwhm_deg;
      const double e = std::exp(-kFourLn2 * u * u);
      const std::array<double, 4> row = {
          1.0, e, fit.a * e * 2.0 * kFourLn2 * u / fit.fwhm_deg,
          fit.a * e * 2.0 * kFourLn2 * u * u / fit.fwhm_deg};
      for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) jtj[i][j] += row[i] * row[j];
    }
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < i; ++j) jtj[i][j] = jtj[j][i];
    const double sigma2 = out.ssr / static_cast<double>(pts.size() - 4);
    // Columns of the inverse via one solve per unit vector.
    for (int i = 0; i < 4; ++i) {
      std::array<double, 4> unit{};
      unit[i] = 1.0;
      const LinSolveResult sol = solve_small(jtj, unit, 4);
      fit.param_stderr[i] =
          sol.ok && sol.x[i] > 0.0 ? std::sqrt(sigma2 * sol.x[i]) : 0.0;
    }
  }
  return fit;
}

double SinusoidFit::eval(double theta_deg) const {
  return c0 + c1 * std::cos(2.0 * deg2rad(theta_deg - theta0_deg));
}

SinusoidFit fit_sinusoid(std::span<const XY> points) {
  if (points.size() < 5)
    throw std::invalid_argument("fit_sinusoid: need at least 5 points");
  const auto [min_it, max_it] = std::minmax_element(
      points.begin(), points.end(),
      [](const XY& l, const XY& r) { return l.x < r.x; });
  if (max_it->x - min_it->x < 90.0)
    throw std::invalid_argument("fit_sinusoid: points must span >= 90 deg");

  std::array<std::array<double, 4>, 4> m{};
  std::array<double, 4> rhs{};
  for (const auto& p : points) {
    const double t = 2.0 * deg2rad(p.x);
    const std::array<double, 3> row = {1.0, std::cos(t), std::sin(t)};
    for (int i = 0; i < 3; ++i) {
      rhs[i] += row[i] * p.y;
      for (int j = 0; j < 3; ++j) m[i][j] += row[i] * row[j];
    }
  }
  const LinSolveResult sol = solve_small(m, rhs, 3);
  if (!sol.ok) throw FitError("fit_sinusoid: degenerate system");

  SinusoidFit fit;
  fit.c0 = sol.x[0];
  fit.c1 = std::hypot(sol.x[1], sol.x[2]);
  // c0 + b cos2t + c sin2t  ==  c0 + c1 cos(2(t - t0))
  fit.theta0_deg =
      fit.c1 > 0.0
          ? wrap_deg_180(std::atan2(sol.x[2], sol.x[1]) * 90.0 / std::numbers::pi)
          : 0.0;
  double ssr = 0.0;
  for (const auto& p : points) {
    const double r = fit.eval(p.x) - p.y;
    ssr += r * r;
  }
  fit.rms_residual = std::sqrt(ssr / static_cast<double>(points.size()));
  return fit;
}

double max_sensitivity(const DipFit& fit, SensitivityNormalization norm) {
  if (!fit.converged)
    throw std::invalid_argument("max_sensitivity: fit did not converge");
  // max |dy/dx| of the Gaussian dip, attained at (x-xc)/fwhm = 1/sqrt(8 ln2).
  const double k = std::sqrt(8.0 * std::numbers::ln2) * std::exp(-0.5);
  const double raw = k * std::abs(fit.a) / fit.fwhm_deg;
  if (norm == SensitivityNormalization::None) return raw;
  if (fit.y0 == 0.0)
    throw FitError("max_sensitivity: zero baseline, cannot normalize");
  return raw / std::abs(fit.y0);
}

double sinusoid_max_gradient(const SinusoidFit& fit) {
  const double peak = fit.c0 + fit.c1;
  if (peak <= 0.0)
    throw FitError("sinusoid_max_gradient: non-positive peak");
  return 2.0 * fit.c1 * (std::numbers::pi / 180.0) / peak;
}

double sinusoid_lobe_fwhm_deg(const SinusoidFit& fit) {
  if (fit.c1 <= 0.0)
    throw FitError("sinusoid_lobe_fwhm_deg: no modulation");
  // Bisect for the half-depth crossing on the falling flank of the lobe.
  const double half_level = fit.c0;
  double lo = fit.theta0_deg, hi = fit.theta0_deg + 90.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (fit.eval(mid) > half_level)
      lo = mid;
    else
      hi = mid;
  }
  return 2.0 * (0.5 * (lo + hi) - fit.theta0_deg);
}

std::vector<DipWindow> detect_dips(std::span<const XY> points) {
  std::vector<XY> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(),
            [](const XY& l, const XY& r) { return l.x < r.x; });
  if (pts.size() < 3) return {};

  const double flat = flat_level(pts);
  const double threshold = 0.5 * flat;
  std::vector<bool> excluded(pts.size(), false);
  std::vector<DipWindow> dips;

  for (;;) {
    std::size_t best = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (excluded[i] || pts[i].y >= threshold) continue;
      if (best == pts.size() || pts[i].y < pts[best].y) best = i;
    }
    if (best == pts.size()) break;
    DipWindow dip;
    dip.min_index = best;
    dip.center_deg = pts[best].x;
    dip.est_fwhm_deg = estimate_fwhm(pts, best, flat);
    dips.push_back(dip);
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (std::abs(pts[i].x - pts[best].x) < 30.0) excluded[i] = true;
  }
  std::sort(dips.begin(), dips.end(), [](const DipWindow& l, const DipWindow& r) {
    return l.center_deg < r.center_deg;
  });
  return dips;
}

std::vector<MetricsRow> metrics_table(std::span<const TimedSweepPoints> sweeps) {
  std::vector<MetricsRow> rows;
  for (const auto& sweep : sweeps) {
    std::vector<XY> pts;
    pts.reserve(sweep.points.size());
    for (const auto& p : sweep.points)
      if (std::isfinite(p.y)) pts.push_back(p);

    const std::vector<DipWindow> dips = detect_dips(pts);
    if (dips.empty()) {
      MetricsRow row;
      row.integration_time_s = sweep.integration_time_s;
      row.dip_index = 0;
      row.present = false;
      rows.push_back(row);
      continue;
    }
    int dip_id = 0;
    for (const auto& dip : dips) {
      MetricsRow row;
      row.integration_time_s = sweep.integration_time_s;
      row.dip_index = dip_id++;
      const double half_window = 1.5 * dip.est_fwhm_deg;
      std::vector<XY> window;
      for (const auto& p : pts)
        if (std::abs(p.x - dip.center_deg) <= half_window) window.push_back(p);
      if (window.size() >= 5) {
        try {
          row.fit = fit_gaussian_dip(window);
          row.present = true;
          row.residual_std_pct = row.fit.residual_std_pct;
          row.dynamic_range_deg = row.fit.fwhm_deg;
          if (row.fit.converged) {
            row.max_sensitivity_per_deg =
                max_sensitivity(row.fit, SensitivityNormalization::Baseline);
            row.max_sensitivity_raw_per_deg =
                max_sensitivity(row.fit, SensitivityNormalization::None);
          }
        } catch (const FitError&) {
          row.present = false;
        }
      }
      rows.push_back(row);
    }
  }
  return rows;
}

double snr(std::span<const double> s_in, std::span<const double> s_out) {
  if (s_in.size() < 2 || s_out.size() < 2)
    throw std::invalid_argument("snr: need at least 2 samples per side");
  const auto stats = [](std::span<const double> s) {
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    var /= static_cast<double>(s.size() - 1);
    return std::pair<double, double>{mean, var};
  };
  const auto [mean_in, var_in] = stats(s_in);
  const auto [mean_out, var_out] = stats(s_out);
  const double denom = var_in + var_out;
  if (denom <= 0.0)
    throw FitError("snr: zero combined variance, result undefined");
  return std::abs(mean_in - mean_out) / std::sqrt(denom);
}

}  // namespace qpm
