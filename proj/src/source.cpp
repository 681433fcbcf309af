#include "qpm/source.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qpm/rng.hpp"
#include "qpm/scenario.hpp"

namespace qpm {

void SourceModel::validate() const {
  if (pair_rate_hz < 0.0)
    throw std::invalid_argument("source: pair_rate_hz must be >= 0");
  if (coherence_time_ps <= 0.0)
    throw std::invalid_argument("source: coherence_time_ps must be > 0");
  if (pair_jitter_sigma_ps < 0.0)
    throw std::invalid_argument("source: pair_jitter_sigma_ps must be >= 0");
  if (stray_rate_hz < 0.0)
    throw std::invalid_argument("source: stray_rate_hz must be >= 0");
  if (nbar() >= 1.0)
    throw std::invalid_argument(
        "source: mean pairs per coherence cell must be < 1");
}

void DetectorModel::validate() const {
  if (efficiency < 0.0 || efficiency > 1.0)
    throw std::invalid_argument("detector: efficiency must be in [0, 1]");
  if (dark_rate_hz < 0.0)
    throw std::invalid_argument("detector: dark_rate_hz must be >= 0");
  if (dead_time_ps < 0.0)
    throw std::invalid_argument("detector: dead_time_ps must be >= 0");
  if (jitter_sigma_ps < 0.0)
    throw std::invalid_argument("detector: jitter_sigma_ps must be >= 0");
}

namespace {

std::int64_t clamp_ts(double t, std::int64_t duration_ps) {
  const auto r = static_cast<std::int64_t>(std::llround(t));
  return std::clamp<std::int64_t>(r, 0, duration_ps);
}

}  // namespace

std::pair<TimeTagStream, TimeTagStream> generate_raw_pairs(
    const SourceModel& source, std::int64_t duration_ps,
    std::uint64_t rng_seed) {
  source.validate();
  const auto cell_ps = static_cast<std::int64_t>(
      std::llround(source.coherence_time_ps));
  if (cell_ps <= 0) throw std::invalid_argument("source: coherence cell < 1 ps");
  if (duration_ps < cell_ps)
    throw std::invalid_argument("source: duration shorter than one coherence cell");

  const std::uint64_t n_cells =
      static_cast<std::uint64_t>(duration_ps / cell_ps);
  std::vector<std::int64_t> signal, idler;
  const double nbar = source.nbar();
  if (nbar > 0.0) {
    signal.reserve(static_cast<std::size_t>(
        source.pair_rate_hz * static_cast<double>(duration_ps) * 1e-12 * 1.1) + 16);
    idler.reserve(signal.capacity());

    RandomStream rng(rng_seed);
    const double q = nbar / (1.0 + nbar);  // P(k >= 1) for Bose-Einstein
    // Jump directly between occupied cells; within an occupied cell the
    // conditional count is 1 + the same geometric tail.
    std::uint64_t cell = rng.geometric0(1.0 - q);
    while (cell < n_cells) {
      const std::uint64_t k = 1 + rng.geometric0(q);
      const std::int64_t cell_start = static_cast<std::int64_t>(cell) * cell_ps;
      for (std::uint64_t i = 0; i < k; ++i) {
        const auto offset = static_cast<std::int64_t>(
            rng.uniform01() * static_cast<double>(cell_ps));
        const std::int64_t t_signal =
            cell_start + std::min(offset, cell_ps - 1);
        signal.push_back(t_signal);
        const double jitter = source.pair_jitter_sigma_ps > 0.0
                                  ? rng.gaussian(source.pair_jitter_sigma_ps)
                                  : 0.0;
        idler.push_back(clamp_ts(static_cast<double>(t_signal) + jitter,
                                 duration_ps));
      }
      cell += 1 + rng.geometric0(1.0 - q);
    }
    // Multi-pair cells emit in draw order, not time order; idler jitter can
    // cross cell boundaries.
    std::sort(signal.begin(), signal.end());
    std::sort(idler.begin(), idler.end());
  }
  return {TimeTagStream(std::move(signal), duration_ps),
          TimeTagStream(std::move(idler), duration_ps)};
}

TimeTagStream thin_stream(const TimeTagStream& stream,
                          double transmission_probability,
                          std::uint64_t rng_seed) {
  if (transmission_probability < 0.0 || transmission_probability > 1.0)
    throw std::invalid_argument("thin_stream: probability must be in [0, 1]");
  if (transmission_probability >= 1.0) return stream;
  std::vector<std::int64_t> kept;
  if (transmission_probability > 0.0) {
    RandomStream rng(rng_seed);
    kept.reserve(static_cast<std::size_t>(
        static_cast<double>(stream.size()) * transmission_probability) + 16);
    for (std::int64_t t : stream.timestamps_ps())
      if (rng.bernoulli(transmission_probability)) kept.push_back(t);
  }
  return TimeTagStream(std::move(kept), stream.duration_ps());
}

TimeTagStream poisson_process_stream(double rate_hz, std::int64_t duration_ps,
                                     std::uint64_t rng_seed) {
  if (rate_hz < 0.0)
    throw std::invalid_argument("poisson_process_stream: rate must be >= 0");
  std::vector<std::int64_t> ts;
  if (rate_hz > 0.0 && duration_ps > 0) {
    RandomStream rng(rng_seed);
    const double rate_per_ps = rate_hz * 1e-12;
    double t = 0.0;
    for (;;) {
      t += rng.exponential(rate_per_ps);
      const auto tick = static_cast<std::int64_t>(std::llround(t));
      if (tick > duration_ps) break;
      ts.push_back(tick);
    }
  }
  return TimeTagStream(std::move(ts), duration_ps);
}

TimeTagStream detect(const TimeTagStream& stream, const DetectorModel& det,
                     std::int64_t duration_ps, std::uint64_t rng_seed) {
  det.validate();
  // Sub-stage streams are derived from the caller's seed so the chain stays
  // reproducible regardless of how many events each stage consumes.
  const TimeTagStream thinned =
      thin_stream(stream, det.efficiency, derive_seed(rng_seed, "detect.eff", 0));
  const TimeTagStream dark = poisson_process_stream(
      det.dark_rate_hz, duration_ps, derive_seed(rng_seed, "detect.dark", 0));
  std::vector<std::int64_t> merged =
      merge_sorted(thinned.timestamps_ps(), dark.timestamps_ps());

  if (det.jitter_sigma_ps > 0.0) {
    RandomStream rng(derive_seed(rng_seed, "detect.jitter", 0));
    for (auto& t : merged)
      t = clamp_ts(static_cast<double>(t) + rng.gaussian(det.jitter_sigma_ps),
                   duration_ps);
    std::sort(merged.begin(), merged.end());
  }

  if (det.dead_time_ps > 0.0) {
    const auto dead = static_cast<std::int64_t>(std::llround(det.dead_time_ps));
    std::vector<std::int64_t> alive;
    alive.reserve(merged.size());
    std::int64_t last_accepted = std::numeric_limits<std::int64_t>::min() / 2;
    for (std::int64_t t : merged) {
      if (t - last_accepted >= dead) {
        alive.push_back(t);
        last_accepted = t;
      }
    }
    merged = std::move(alive);
  }
  return TimeTagStream(std::move(merged), duration_ps);
}

}  // namespace qpm
