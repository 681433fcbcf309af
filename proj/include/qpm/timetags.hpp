#pragma once

#include <cstdint>
#include <vector>

namespace qpm {

/// Sorted picosecond event timestamps for one detector channel.
/// Construction validates ordering and range so every downstream consumer
/// can rely on the invariants.
class TimeTagStream {
 public:
  TimeTagStream() = default;

  /// Throws std::invalid_argument on unsorted or out-of-range timestamps.
  TimeTagStream(std::vector<std::int64_t> timestamps_ps,
                std::int64_t duration_ps);

  const std::vector<std::int64_t>& timestamps_ps() const { return ts_; }
  std::int64_t duration_ps() const { return duration_ps_; }
  std::size_t size() const { return ts_.size(); }
  bool empty() const { return ts_.empty(); }

  /// Mean event rate in Hz.
  double rate_hz() const;

  bool operator==(const TimeTagStream&) const = default;

 private:
  std::vector<std::int64_t> ts_;
  std::int64_t duration_ps_ = 0;
};

/// Merge two sorted timestamp vectors into one sorted vector.
std::vector<std::int64_t> merge_sorted(const std::vector<std::int64_t>& a,
                                       const std::vector<std::int64_t>& b);

}  // namespace qpm
