#pragma once

#include <cstdint>
#include <vector>

#include "qpm/timetags.hpp"

namespace qpm {

/// Coincidence pairing semantics. OneToOne mirrors a counting instrument
/// (greedy in time order, each event used at most once); AllPairs counts
/// every pairing within the window, as a start-stop-free correlation
/// analysis does. Eq.-style g2(0) estimates use OneToOne by default.
enum class CoincidenceLogic { OneToOne, AllPairs };

struct CoincidenceStats {
  std::uint64_t comparisons = 0;  // merge-pass work, for benchmarks
};

/// Events in A matched to events in B with |t_a - (t_b + delay)| <=
/// window/2, using the selected pairing logic. Single linear merge pass;
/// greedy ties go to the earliest unmatched partner.
std::uint64_t count_coincidences(
    const TimeTagStream& a, const TimeTagStream& b, double window_ps,
    double delay_ps, CoincidenceLogic logic = CoincidenceLogic::OneToOne,
    CoincidenceStats* stats = nullptr);

/// g2(0) = r_ab / (r_a * r_b * window), window in seconds. Throws
/// std::domain_error when the denominator is zero.
double g2_zero_estimate(double r_a_hz, double r_b_hz, double r_ab_hz,
                        double window_ps);

/// Counts, rates, and the zero-delay autocorrelation for one stream pair.
struct CorrelationResult {
  std::uint64_t n_a = 0;
  std::uint64_t n_b = 0;
  std::uint64_t n_ab = 0;
  std::int64_t duration_ps = 0;
  double window_ps = 0.0;
  double r_a_hz = 0.0;
  double r_b_hz = 0.0;
  double r_ab_hz = 0.0;
  double g2_zero = 0.0;
  bool g2_valid = false;  // false when a singles rate is zero
};

CorrelationResult correlate(const TimeTagStream& a, const TimeTagStream& b,
                            double window_ps, double delay_ps,
                            CoincidenceLogic logic = CoincidenceLogic::OneToOne);

/// Binned cross-correlation g2(tau) over [-max_delay, +max_delay].
struct G2Histogram {
  double bin_width_ps = 0.0;
  std::vector<double> delays_ps;  // bin centers
  std::vector<std::uint64_t> counts;
  std::vector<double> g2;
  double peak_fwhm_ps = 0.0;  // NaN when no peak rises above the wings
  bool g2_valid = false;      // false when a singles rate is zero
};

/// All-pairs histogram of delays t_a - t_b; g2 per bin normalized by the
/// accidental rate r_a * r_b * bin_width * duration. max_delay_ps must be
/// a positive multiple of bin_width_ps.
G2Histogram g2_histogram(const TimeTagStream& a, const TimeTagStream& b,
                         double bin_width_ps, double max_delay_ps);

}  // namespace qpm
