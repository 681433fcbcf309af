#include "qpm/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qpm {

std::uint64_t count_coincidences(const TimeTagStream& a, const TimeTagStream& b,
                                 double window_ps, double delay_ps,
                                 CoincidenceLogic logic,
                                 CoincidenceStats* stats) {
  if (window_ps <= 0.0)
    throw std::invalid_argument("count_coincidences: window_ps must be > 0");
  const auto& ta = a.timestamps_ps();
  const auto& tb = b.timestamps_ps();
  const double half = window_ps / 2.0;
  std::uint64_t matches = 0;
  std::uint64_t work = 0;

  if (logic == CoincidenceLogic::OneToOne) {
    std::size_t j = 0;  // earliest unmatched candidate in B
    for (std::size_t i = 0; i < ta.size() && j < tb.size(); ++i) {
      const double t = static_cast<double>(ta[i]);
      while (j < tb.size() &&
             static_cast<double>(tb[j]) + delay_ps < t - half) {
        ++j;
        ++work;
      }
      ++work;
      if (j < tb.size() && static_cast<double>(tb[j]) + delay_ps <= t + half) {
        ++matches;
        ++j;
      }
    }
  } else {
    std::size_t lo = 0, hi = 0;  // b-range [lo, hi) inside the window of a[i]
    for (std::size_t i = 0; i < ta.size(); ++i) {
      const double t = static_cast<double>(ta[i]);
      while (lo < tb.size() &&
             static_cast<double>(tb[lo]) + delay_ps < t - half) {
        ++lo;
        ++work;
      }
      if (hi < lo) hi = lo;
      while (hi < tb.size() &&
             static_cast<double>(tb[hi]) + delay_ps <= t + half) {
        ++hi;
        ++work;
      }
      ++work;
      matches += hi - lo;
    }
  }
  if (stats) stats->comparisons = work;
  return matches;
}

double g2_zero_estimate(double r_a_hz, double r_b_hz, double r_ab_hz,
                        double window_ps) {
  if (window_ps <= 0.0)
    throw std::invalid_argument("g2_zero: window_ps must be > 0");
  const double denom = r_a_hz * r_b_hz * window_ps * 1e-12;
  if (denom <= 0.0)
    throw std::domain_error("g2_zero: undefined for zero singles rates");
  return r_ab_hz / denom;
}

CorrelationResult correlate(const TimeTagStream& a, const TimeTagStream& b,
                            double window_ps, double delay_ps,
                            CoincidenceLogic logic) {
  if (a.duration_ps() != b.duration_ps())
    throw std::invalid_argument("correlate: stream durations differ");
  CorrelationResult res;
  res.n_a = a.size();
  res.n_b = b.size();
  res.duration_ps = a.duration_ps();
  res.window_ps = window_ps;
  res.n_ab = count_coincidences(a, b, window_ps, delay_ps, logic);
  const double t_s = static_cast<double>(res.duration_ps) * 1e-12;
  if (t_s > 0.0) {
    res.r_a_hz = static_cast<double>(res.n_a) / t_s;
    res.r_b_hz = static_cast<double>(res.n_b) / t_s;
    res.r_ab_hz = static_cast<double>(res.n_ab) / t_s;
  }
  if (res.r_a_hz > 0.0 && res.r_b_hz > 0.0) {
    res.g2_zero = g2_zero_estimate(res.r_a_hz, res.r_b_hz, res.r_ab_hz, window_ps);
    res.g2_valid = true;
  }
  return res;
}

namespace {

/// Mean of the outermost bins (|tau| >= 3/4 max delay) as the wing level.
double wing_baseline(const std::vector<double>& g2, double* wing_std) {
  const std::size_t n = g2.size();
  const std::size_t edge = std::max<std::size_t>(1, n / 8);
  double sum = 0.0, sum2 = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < edge; ++i) {
    for (double v : {g2[i], g2[n - 1 - i]}) {
      sum += v;
      sum2 += v * v;
      ++count;
    }
  }
  const double mean = sum / static_cast<double>(count);
  if (wing_std) {
    const double var =
        std::max(0.0, sum2 / static_cast<double>(count) - mean * mean);
    *wing_std = std::sqrt(var);
  }
  return mean;
}

}  // namespace

G2Histogram g2_histogram(const TimeTagStream& a, const TimeTagStream& b,
                         double bin_width_ps, double max_delay_ps) {
  if (bin_width_ps <= 0.0)
    throw std::invalid_argument("g2_histogram: bin_width_ps must be > 0");
  const double ratio = max_delay_ps / bin_width_ps;
  if (max_delay_ps <= 0.0 ||
      std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument(
        "g2_histogram: max_delay_ps must be a positive multiple of bin_width_ps");
  if (a.duration_ps() != b.duration_ps())
    throw std::invalid_argument("g2_histogram: stream durations differ");

  const auto half_bins = static_cast<std::size_t>(std::llround(ratio));
  const std::size_t n_bins = 2 * half_bins;
  G2Histogram h;
  h.bin_width_ps = bin_width_ps;
  h.delays_ps.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i)
    h.delays_ps[i] = -max_delay_ps + (static_cast<double>(i) + 0.5) * bin_width_ps;
  h.counts.assign(n_bins, 0);
  h.g2.assign(n_bins, 0.0);
  h.peak_fwhm_ps = std::numeric_limits<double>::quiet_NaN();

  const auto& ta = a.timestamps_ps();
  const auto& tb = b.timestamps_ps();
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    const double t = static_cast<double>(ta[i]);
    while (lo < tb.size() && static_cast<double>(tb[lo]) < t - max_delay_ps)
      ++lo;
    if (hi < lo) hi = lo;
    while (hi < tb.size() && static_cast<double>(tb[hi]) <= t + max_delay_ps)
      ++hi;
    for (std::size_t j = lo; j < hi; ++j) {
      const double tau = t - static_cast<double>(tb[j]);
      auto bin = static_cast<std::size_t>((tau + max_delay_ps) / bin_width_ps);
      if (bin >= n_bins) bin = n_bins - 1;  // tau == +max_delay
      ++h.counts[bin];
    }
  }

  const double t_s = static_cast<double>(a.duration_ps()) * 1e-12;
  if (!ta.empty() && !tb.empty() && t_s > 0.0) {
    const double norm = static_cast<double>(ta.size()) *
                        static_cast<double>(tb.size()) * (bin_width_ps * 1e-12) /
                        t_s;
    for (std::size_t i = 0; i < n_bins; ++i)
      h.g2[i] = static_cast<double>(h.counts[i]) / norm;
    h.g2_valid = true;

    double wing_std = 0.0;
    const double baseline = wing_baseline(h.g2, &wing_std);
    const auto peak_it = std::max_element(h.g2.begin(), h.g2.end());
    const auto peak_idx = static_cast<std::size_t>(peak_it - h.g2.begin());
    const double peak = *peak_it;
    if (peak - baseline > 5.0 * wing_std && peak > baseline) {
      const double half_level = baseline + 0.5 * (peak - baseline);
      // Linear interpolation at the half level on both flanks.
      double left = h.delays_ps.front();
      for (std::size_t i = peak_idx; i-- > 0;) {
        if (h.g2[i] <= half_level) {
          const double f = (half_level - h.g2[i]) / (h.g2[i + 1] - h.g2[i]);
          left = h.delays_ps[i] + f * bin_width_ps;
          break;
        }
      }
      double right = h.delays_ps.back();
      for (std::size_t i = peak_idx + 1; i < n_bins; ++i) {
        if (h.g2[i] <= half_level) {
          const double f = (h.g2[i - 1] - half_level) / (h.g2[i - 1] - h.g2[i]);
          right = h.delays_ps[i - 1] + f * bin_width_ps;
          break;
        }
      }
      h.peak_fwhm_ps = right - left;
    }
  }
  return h;
}

}  // namespace qpm
