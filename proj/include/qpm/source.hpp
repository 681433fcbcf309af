#pragma once

#include <cstdint>
#include <utility>

#include "qpm/timetags.hpp"

namespace qpm {

/// Entangled-pair source parameters. Pairs are emitted in coherence cells
/// of length coherence_time_ps with a thermal (Bose-Einstein) pair number
/// per cell, mean nbar = pair_rate_hz * coherence_time_ps * 1e-12.
struct SourceModel {
  double pair_rate_hz = 450e3;
  double coherence_time_ps = 1000.0;
  double pair_jitter_sigma_ps = 12700.0;  // signal-idler arrival spread
  double stray_rate_hz = 500.0;           // uncorrelated background, per arm

  double nbar() const { return pair_rate_hz * coherence_time_ps * 1e-12; }
  void validate() const;
};

struct DetectorModel {
  double efficiency = 0.5;
  double dark_rate_hz = 500.0;
  double dead_time_ps = 50000.0;  // non-paralyzable
  double jitter_sigma_ps = 350.0;

  void validate() const;
};

/// Raw signal/idler emission streams (before any loss or detection).
/// Per coherence cell the pair count is Bose-Einstein distributed; each
/// pair is placed uniformly in its cell and the idler timestamp is the
/// signal timestamp plus a Gaussian jitter, both clamped to [0, duration].
/// Rejects nbar >= 1 and duration shorter than one cell.
std::pair<TimeTagStream, TimeTagStream> generate_raw_pairs(
    const SourceModel& source, std::int64_t duration_ps, std::uint64_t rng_seed);

/// Keep each event independently with the given probability; order kept.
TimeTagStream thin_stream(const TimeTagStream& stream,
                          double transmission_probability,
                          std::uint64_t rng_seed);

/// Homogeneous Poisson process over [0, duration]; used for dark counts,
/// stray light, and test fixtures.
TimeTagStream poisson_process_stream(double rate_hz, std::int64_t duration_ps,
                                     std::uint64_t rng_seed);

/// Detector imperfection chain, applied in order: efficiency thinning,
/// Poisson dark-count merge, per-event Gaussian timing jitter (re-sorted,
/// clamped to [0, duration]), then non-paralyzable dead time.
TimeTagStream detect(const TimeTagStream& stream, const DetectorModel& det,
                     std::int64_t duration_ps, std::uint64_t rng_seed);

}  // namespace qpm
