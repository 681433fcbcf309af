#include "qpm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace qpm {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + tmp + " -> " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PgmNormalization write_pgm16(const std::string& path, int width, int height,
                             std::span<const double> values) {
  if (width <= 0 || height <= 0 ||
      values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw IoError("write_pgm16: dimensions do not match data");

  PgmNormalization norm;
  norm.min = std::numeric_limits<double>::infinity();
  norm.max = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (std::isnan(v)) {
      ++norm.invalid_pixels;
      continue;
    }
    norm.min = std::min(norm.min, v);
    norm.max = std::max(norm.max, v);
  }
  if (norm.invalid_pixels == static_cast<int>(values.size())) {
    norm.min = 0.0;
    norm.max = 0.0;
  }

  std::string content;
  {
    char header[64];
    std::snprintf(header, sizeof(header), "P5\n%d %d\n65535\n", width, height);
    content = header;
  }
  const double span = norm.max - norm.min;
  content.reserve(content.size() + values.size() * 2);
  for (double v : values) {
    std::uint16_t q = 0;
    if (!std::isnan(v) && span > 0.0)
      q = static_cast<std::uint16_t>(
          std::lround(65535.0 * (v - norm.min) / span));
    // big-endian sample order per the format
    content.push_back(static_cast<char>(q >> 8));
    content.push_back(static_cast<char>(q & 0xff));
  }
  write_file_atomic(path, content);
  return norm;
}

namespace {

struct Record {
  char channel;
  std::int64_t ts;
};

std::vector<Record> merged_records(const TagsFile& tags) {
  std::vector<Record> rec;
  rec.reserve(tags.channel_a.size() + tags.channel_b.size());
  const auto& a = tags.channel_a.timestamps_ps();
  const auto& b = tags.channel_b.timestamps_ps();
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && a[i] <= b[j]))
      rec.push_back({'A', a[i++]});
    else
      rec.push_back({'B', b[j++]});
  }
  return rec;
}

void append_le_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_le_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

TagsFile assemble(std::vector<std::int64_t> a, std::vector<std::int64_t> b,
                  std::int64_t duration) {
  try {
    return {TimeTagStream(std::move(a), duration),
            TimeTagStream(std::move(b), duration)};
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("tags file invalid: ") + e.what());
  }
}

}  // namespace

void write_tags_csv(const std::string& path, const TagsFile& tags) {
  if (tags.channel_a.duration_ps() != tags.channel_b.duration_ps())
    throw IoError("write_tags_csv: channel durations differ");
  std::string content = "# qpm_tags duration_ps=" +
                        std::to_string(tags.channel_a.duration_ps()) + "\n";
  content += "channel,timestamp_ps\n";
  for (const Record& r : merged_records(tags)) {
    content.push_back(r.channel);
    content.push_back(',');
    content += std::to_string(r.ts);
    content.push_back('\n');
  }
  write_file_atomic(path, content);
}

void write_tags_binary(const std::string& path, const TagsFile& tags) {
  if (tags.channel_a.duration_ps() != tags.channel_b.duration_ps())
    throw IoError("write_tags_binary: channel durations differ");
  std::string content = "QTT1";
  append_le_u64(content, static_cast<std::uint64_t>(tags.channel_a.duration_ps()));
  for (const Record& r : merged_records(tags)) {
    content.push_back(r.channel);
    append_le_u64(content, static_cast<std::uint64_t>(r.ts));
  }
  write_file_atomic(path, content);
}

TagsFile read_tags(const std::string& path) {
  const std::string data = read_file(path);
  std::vector<std::int64_t> a, b;

  if (data.size() >= 12 && data.compare(0, 4, "QTT1") == 0) {
    const std::int64_t duration =
        static_cast<std::int64_t>(read_le_u64(data.data() + 4));
    const std::size_t body = data.size() - 12;
    if (body % 9 != 0) throw IoError("tags file truncated: " + path);
    for (std::size_t off = 12; off + 9 <= data.size(); off += 9) {
      const char ch = data[off];
      const auto ts = static_cast<std::int64_t>(read_le_u64(data.data() + off + 1));
      if (ch == 'A')
        a.push_back(ts);
      else if (ch == 'B')
        b.push_back(ts);
      else
        throw IoError("tags file: unknown channel byte");
    }
    return assemble(std::move(a), std::move(b), duration);
  }

  std::istringstream in(data);
  std::string line;
  std::int64_t duration = -1;
  bool saw_header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# qpm_tags duration_ps=", 0) == 0) {
      duration = std::strtoll(line.c_str() + 23, nullptr, 10);
      continue;
    }
    if (line == "channel,timestamp_ps") {
      saw_header = true;
      continue;
    }
    if (line.size() < 3 || line[1] != ',' || (line[0] != 'A' && line[0] != 'B'))
      throw IoError("tags csv: bad record at line " + std::to_string(line_no));
    char* end = nullptr;
    const std::int64_t ts = std::strtoll(line.c_str() + 2, &end, 10);
    if (end == line.c_str() + 2)
      throw IoError("tags csv: bad timestamp at line " + std::to_string(line_no));
    (line[0] == 'A' ? a : b).push_back(ts);
  }
  if (duration < 0 || !saw_header)
    throw IoError("tags csv: missing duration or header: " + path);
  return assemble(std::move(a), std::move(b), duration);
}

}  // namespace qpm
