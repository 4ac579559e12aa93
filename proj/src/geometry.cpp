#include "motocal/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace motocal {

Mat3 rot_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return m;
}

Mat3 rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return m;
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return m;
}

bool is_rotation(const Mat3& r, double tol) {
  const Mat3 gram = r.transpose() * r - Mat3::Identity();
  return gram.cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

Mat3 ExtrinsicParams::rotation() const {
  return rot_z(yaw_fixed) * rot_y(pitch) * rot_x(roll);
}

void euler_from_rotation(const Mat3& r, double& roll, double& pitch, double& yaw) {
  pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  roll = std::atan2(r(2, 1), r(2, 2));
  yaw = std::atan2(r(1, 0), r(0, 0));
}

double MotorTrajectory::angle_at(double t) const {
  if (samples.size() < 2) {
    throw InputError("motor trajectory needs at least 2 samples");
  }
  if (t < t_begin() || t > t_end()) {
    throw Error("time " + std::to_string(t) + " outside trajectory span [" +
                std::to_string(t_begin()) + ", " + std::to_string(t_end()) + "]");
  }
  auto it = std::upper_bound(samples.begin(), samples.end(), t,
                             [](double v, const Sample& s) { return v < s.t; });
  if (it == samples.begin()) ++it;
  if (it == samples.end()) --it;
  const Sample& hi = *it;
  const Sample& lo = *(it - 1);
  const double u = (t - lo.t) / (hi.t - lo.t);
  return lo.angle + u * (hi.angle - lo.angle);
}

void MotorTrajectory::validate() const {
  if (samples.size() < 2) {
    throw InputError("motor trajectory needs at least 2 samples, got " +
                     std::to_string(samples.size()));
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      throw InputError("trajectory timestamps not strictly increasing at sample " +
                       std::to_string(i));
    }
  }
}

Mat3 motor_rotation(const MotorTrajectory& traj, double t) {
  return rot_z(traj.angle_at(t));
}

double wrap_angle(double angle) {
  double w = std::remainder(angle, 2.0 * M_PI);
  if (w <= -M_PI) w += 2.0 * M_PI;
  return w;
}

}  // namespace motocal
