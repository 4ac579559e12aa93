#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "motocal/geometry.hpp"

namespace motocal {

// One raw measurement: position in the LiDAR frame {L} plus sensor-clock time.
struct RawScanRecord {
  double x = 0.0;  // m
  double y = 0.0;
  double z = 0.0;
  double t = 0.0;  // s

  Vec3 position() const { return {x, y, z}; }
};

struct StampedPoint {
  Vec3 p_L = Vec3::Zero();  // LiDAR frame
  double t = 0.0;           // s
  double theta = 0.0;       // rad, interpolated motor angle at t
};

// The pipeline input: every point carries its interpolated motor angle.
struct MotorStampedCloud {
  std::vector<StampedPoint> points;
  std::string source_id;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct StampResult {
  MotorStampedCloud cloud;
  std::size_t dropped = 0;  // records outside the encoder span
};

// Attaches theta(t) to every record inside the trajectory span; records
// outside the span are dropped (extrapolating motor angle invents motion).
// Throws EmptyInputError if nothing survives. Point order is preserved.
StampResult stamp_cloud(const std::vector<RawScanRecord>& records,
                        const MotorTrajectory& traj);

std::vector<RawScanRecord> to_records(const MotorStampedCloud& cloud);

}  // namespace motocal
