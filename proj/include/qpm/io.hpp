#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "qpm/timetags.hpp"

namespace qpm {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form of a double (17 significant digits),
/// so CSV output compares exactly against oracle values.
std::string format_double(double v);

/// Write via a temporary file and rename, so readers never observe a
/// partial file.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// 16-bit big-endian P5 portable graymap with linear min-max scaling.
/// NaN pixels map to 0. Returns the normalization actually applied.
struct PgmNormalization {
  double min = 0.0;
  double max = 0.0;
  int invalid_pixels = 0;
};

PgmNormalization write_pgm16(const std::string& path, int width, int height,
                             std::span<const double> values);

/// Two-channel time-tag file. Text form: a duration comment line, a
/// `channel,timestamp_ps` header, then one record per line with channel A
/// or B. Binary form: magic "QTT1", little-endian u64 duration, then
/// records of one channel byte ('A'/'B') and a little-endian u64 picosecond
/// timestamp. Records are merged in time order (channel A first on ties).
struct TagsFile {
  TimeTagStream channel_a;
  TimeTagStream channel_b;
};

void write_tags_csv(const std::string& path, const TagsFile& tags);
void write_tags_binary(const std::string& path, const TagsFile& tags);

/// Reads either form (sniffs the QTT1 magic). Unsorted or out-of-range
/// timestamps are rejected.
TagsFile read_tags(const std::string& path);

}  // namespace qpm
