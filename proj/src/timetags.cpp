#include "qpm/timetags.hpp"

#include <algorithm>
#include <stdexcept>

namespace qpm {

TimeTagStream::TimeTagStream(std::vector<std::int64_t> timestamps_ps,
                             std::int64_t duration_ps)
    : ts_(std::move(timestamps_ps)), duration_ps_(duration_ps) {
  if (duration_ps_ < 0)
    throw std::invalid_argument("TimeTagStream: negative duration");
  std::int64_t prev = 0;
  for (std::int64_t t : ts_) {
    if (t < prev) throw std::invalid_argument("TimeTagStream: unsorted timestamps");
    if (t < 0 || t > duration_ps_)
      throw std::invalid_argument("TimeTagStream: timestamp outside [0, duration]");
    prev = t;
  }
}

double TimeTagStream::rate_hz() const {
  if (duration_ps_ <= 0) return 0.0;
  return static_cast<double>(ts_.size()) /
         (static_cast<double>(duration_ps_) * 1e-12);
}

std::vector<std::int64_t> merge_sorted(const std::vector<std::int64_t>& a,
                                       const std::vector<std::int64_t>& b) {
  std::vector<std::int64_t> out;
  out.resize(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), out.begin());
  return out;
}

}  // namespace qpm
