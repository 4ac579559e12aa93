#pragma once

#include <string>
#include <vector>

#include "motocal/cloud.hpp"

namespace motocal {

// Cloud file formats:
//   text   — CSV "x,y,z,t", one record per line, optional header line
//   binary — magic "LMC1", u64 little-endian count, count x (f64 x,y,z,t)
enum class CloudFormat { kText, kBinary };

// .csv -> text, .lmc -> binary; anything else is an input error.
CloudFormat cloud_format_from_path(const std::string& path);

struct RangeValidation {
  bool enabled = false;
  double min_range = 0.1;  // m, sensor near limit
  double max_range = 40.0;
};

std::vector<RawScanRecord> read_cloud(const std::string& path, CloudFormat format,
                                      const RangeValidation& validation = {});

void write_cloud(const std::vector<RawScanRecord>& records, const std::string& path,
                 CloudFormat format);

// Encoder log, CSV "t,angle_rad". Samples are sorted by time, duplicates
// rejected, and angles unwrapped so the result is interpolation-safe.
MotorTrajectory read_trajectory(const std::string& path);

void write_trajectory(const MotorTrajectory& traj, const std::string& path);

// Adds 2*pi multiples so successive differences land in (-pi, pi].
std::vector<double> unwrap_angles(const std::vector<double>& raw);

}  // namespace motocal
