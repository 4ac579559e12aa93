#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <vector>

#include "motocal/errors.hpp"

namespace motocal {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Cross-product matrix: skew(v) * w == v.cross(w).
inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

// ||R^T R - I||_inf and det(R)-1 both below tol.
bool is_rotation(const Mat3& r, double tol = 1e-9);

// The 4-DOF mounting state between LiDAR frame {L} and motor frame {M}.
// Rotation composition is fixed project-wide as
//   R_L^M = Rz(yaw_fixed) * Ry(pitch) * Rx(roll),
// applied to LiDAR-frame points; translation is r_L^M = (tx, ty, tz_fixed).
// yaw and tz are unobservable for a z-axis motor and stay constant.
struct ExtrinsicParams {
  double roll = 0.0;   // rad
  double pitch = 0.0;  // rad
  double tx = 0.0;     // m
  double ty = 0.0;     // m
  double yaw_fixed = 0.0;  // rad, never optimized
  double tz_fixed = 0.0;   // m, never optimized

  Mat3 rotation() const;
  Vec3 translation() const { return {tx, ty, tz_fixed}; }
};

// Recover (roll, pitch, yaw) from R = Rz(yaw)*Ry(pitch)*Rx(roll).
// Requires |pitch| < pi/2 (near-upright mounting).
void euler_from_rotation(const Mat3& r, double& roll, double& pitch, double& yaw);

// Ordered encoder samples. Angles are unwrapped at ingestion, so linear
// interpolation never crosses a 2*pi seam.
struct MotorTrajectory {
  struct Sample {
    double t = 0.0;      // s
    double angle = 0.0;  // rad, unwrapped
  };
  std::vector<Sample> samples;

  bool empty() const { return samples.empty(); }
  double t_begin() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }
  bool in_span(double t) const {
    return !samples.empty() && t >= t_begin() && t <= t_end();
  }

  // Linearly interpolated angle; throws if t is outside [t_begin, t_end].
  double angle_at(double t) const;

  // As angle_at, but clamps t into the span instead of throwing. Used where
  // a time-offset shift may push boundary timestamps just outside.
  double angle_at_clamped(double t) const {
    return angle_at(std::clamp(t, t_begin(), t_end()));
  }

  // Throws InputError on <2 samples or non-increasing timestamps.
  void validate() const;
};

// Rotation of the motor frame relative to the base at time t: Rz(theta(t)).
Mat3 motor_rotation(const MotorTrajectory& traj, double t);

// Eq.-of-motion of a LiDAR point into the base frame:
//   r_p^B = R_M^B * (R_L^M * p + r_L^M).
inline Vec3 transform_point(const Vec3& p_L, const ExtrinsicParams& ext,
                            const Mat3& r_mb) {
  return r_mb * (ext.rotation() * p_L + ext.translation());
}

// Smallest signed equivalent of an angle difference, in (-pi, pi].
double wrap_angle(double angle);

}  // namespace motocal
