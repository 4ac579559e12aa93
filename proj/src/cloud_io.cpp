#include "motocal/cloud_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace motocal {

namespace {

constexpr char kCloudMagic[4] = {'L', 'M', 'C', '1'};

bool looks_like_header(const std::string& line) {
  return std::any_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isalpha(c) && c != 'e' && c != 'E'; });
}

// Parses exactly n comma-separated doubles; returns false on any failure.
bool parse_csv_doubles(const std::string& line, double* out, int n) {
  std::size_t pos = 0;
  for (int i = 0; i < n; ++i) {
    std::size_t next = line.find(',', pos);
    const std::string field =
        line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    try {
      std::size_t used = 0;
      out[i] = std::stod(field, &used);
      while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used])))
        ++used;
      if (used != field.size()) return false;
    } catch (const std::exception&) {
      return false;
    }
    if (i + 1 < n) {
      if (next == std::string::npos) return false;
      pos = next + 1;
    } else if (next != std::string::npos) {
      return false;
    }
  }
  return true;
}

void check_record(const RawScanRecord& rec, const RangeValidation& validation,
                  const std::string& path, std::size_t line_no) {
  if (!std::isfinite(rec.x) || !std::isfinite(rec.y) || !std::isfinite(rec.z) ||
      !std::isfinite(rec.t)) {
    throw ParseError(path, line_no, "non-finite value in record");
  }
  if (validation.enabled) {
    const double range = rec.position().norm();
    if (range < validation.min_range || range > validation.max_range) {
      std::ostringstream msg;
      msg << "range " << range << " m outside sensor limits [" << validation.min_range
          << ", " << validation.max_range << "]";
      throw ParseError(path, line_no, msg.str());
    }
  }
}

std::vector<RawScanRecord> read_cloud_text(const std::string& path,
                                           const RangeValidation& validation) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open cloud file: " + path);
  std::vector<RawScanRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    double v[4];
    if (!parse_csv_doubles(line, v, 4)) {
      if (records.empty() && looks_like_header(line)) continue;
      throw ParseError(path, line_no, "expected 'x,y,z,t', got: " + line);
    }
    RawScanRecord rec{v[0], v[1], v[2], v[3]};
    check_record(rec, validation, path, line_no);
    records.push_back(rec);
  }
  if (records.empty()) throw EmptyInputError("no records in cloud file: " + path);
  return records;
}

std::vector<RawScanRecord> read_cloud_binary(const std::string& path,
                                             const RangeValidation& validation) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open cloud file: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCloudMagic, 4) != 0) {
    throw InputError("bad magic bytes, not an LMC1 cloud: " + path);
  }
  std::uint64_t count = 0;
  if (!in.read(reinterpret_cast<char*>(&count), sizeof(count))) {
    throw InputError("truncated LMC1 header: " + path);
  }
  if (count == 0) throw EmptyInputError("no records in cloud file: " + path);
  std::vector<RawScanRecord> records(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    double v[4];
    if (!in.read(reinterpret_cast<char*>(v), sizeof(v))) {
      throw InputError("truncated LMC1 payload at record " + std::to_string(i) +
                       " of " + std::to_string(count) + ": " + path);
    }
    records[i] = {v[0], v[1], v[2], v[3]};
    check_record(records[i], validation, path, i + 1);
  }
  return records;
}

}  // namespace

CloudFormat cloud_format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".csv") return CloudFormat::kText;
  if (ext == ".lmc") return CloudFormat::kBinary;
  throw InputError("unknown cloud extension '" + ext + "' (want .csv or .lmc): " + path);
}

std::vector<RawScanRecord> read_cloud(const std::string& path, CloudFormat format,
                                      const RangeValidation& validation) {
  return format == CloudFormat::kText ? read_cloud_text(path, validation)
                                      : read_cloud_binary(path, validation);
}

void write_cloud(const std::vector<RawScanRecord>& records, const std::string& path,
                 CloudFormat format) {
  if (format == CloudFormat::kText) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw InputError("cannot write cloud file: " + path);
    std::fputs("x,y,z,t\n", out);
    for (const auto& r : records) {
      std::fprintf(out, "%.17g,%.17g,%.17g,%.17g\n", r.x, r.y, r.z, r.t);
    }
    std::fclose(out);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write cloud file: " + path);
  out.write(kCloudMagic, 4);
  const std::uint64_t count = records.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& r : records) {
    const double v[4] = {r.x, r.y, r.z, r.t};
    out.write(reinterpret_cast<const char*>(v), sizeof(v));
  }
  if (!out) throw InputError("short write on cloud file: " + path);
}

std::vector<double> unwrap_angles(const std::vector<double>& raw) {
  std::vector<double> out(raw.size());
  double offset = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (i > 0) {
      const double diff = raw[i] - raw[i - 1];
      offset += wrap_angle(diff) - diff;
    }
    out[i] = raw[i] + offset;
  }
  return out;
}

MotorTrajectory read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trajectory file: " + path);
  std::vector<std::pair<double, double>> rows;  // (t, raw angle)
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    double v[2];
    if (!parse_csv_doubles(line, v, 2)) {
      if (rows.empty() && looks_like_header(line)) continue;
      throw ParseError(path, line_no, "expected 't,angle_rad', got: " + line);
    }
    if (!std::isfinite(v[0]) || !std::isfinite(v[1])) {
      throw ParseError(path, line_no, "non-finite value in trajectory sample");
    }
    rows.emplace_back(v[0], v[1]);
  }
  if (rows.size() < 2) {
    throw InputError("trajectory needs at least 2 samples, got " +
                     std::to_string(rows.size()) + ": " + path);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) {
      throw InputError("duplicate trajectory timestamp " +
                       std::to_string(rows[i].first) + ": " + path);
    }
  }
  std::vector<double> raw(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) raw[i] = rows[i].second;
  const std::vector<double> unwrapped = unwrap_angles(raw);

  MotorTrajectory traj;
  traj.samples.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    traj.samples[i] = {rows[i].first, unwrapped[i]};
  }
  traj.validate();
  return traj;
}

void write_trajectory(const MotorTrajectory& traj, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InputError("cannot write trajectory file: " + path);
  std::fputs("t,angle_rad\n", out);
  for (const auto& s : traj.samples) {
    std::fprintf(out, "%.17g,%.17g\n", s.t, s.angle);
  }
  std::fclose(out);
}

StampResult stamp_cloud(const std::vector<RawScanRecord>& records,
                        const MotorTrajectory& traj) {
  traj.validate();
  StampResult result;
  result.cloud.points.reserve(records.size());
  for (const auto& rec : records) {
    if (!traj.in_span(rec.t)) {
      ++result.dropped;
      continue;
    }
    result.cloud.points.push_back({rec.position(), rec.t, traj.angle_at(rec.t)});
  }
  if (result.cloud.points.empty()) {
    throw EmptyInputError("all " + std::to_string(records.size()) +
                          " records fall outside the encoder span");
  }
  return result;
}

std::vector<RawScanRecord> to_records(const MotorStampedCloud& cloud) {
  std::vector<RawScanRecord> records;
  records.reserve(cloud.size());
  for (const auto& pt : cloud.points) {
    records.push_back({pt.p_L.x(), pt.p_L.y(), pt.p_L.z(), pt.t});
  }
  return records;
}

}  // namespace motocal
