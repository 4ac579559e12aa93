#pragma once

#include <cmath>
#include <vector>

#include "motocal/cloud.hpp"
#include "motocal/kdtree.hpp"
#include "motocal/primitives.hpp"

namespace motocal {

// A plane primitive paired with a point that observed the same surface at a
// sufficiently different motor angle. Points stay in {L}; the normal is
// fixed in {B} at build time (current estimate).
struct Correspondence {
  Vec3 normal = Vec3::UnitZ();
  Vec3 point_n = Vec3::Zero();  // anchor observation, {L}
  double t_n = 0.0;
  double theta_n = 0.0;
  Vec3 point_m = Vec3::Zero();  // partner observation, {L}
  double t_m = 0.0;
  double theta_m = 0.0;
  double weight = 1.0;
};

struct AssociationConfig {
  double delta_theta_min = 30.0 * M_PI / 180.0;  // rad
  double r_corr = 0.3;                           // m, point-to-plane gate
  int pairs_per_primitive = 1;
  int workers = 0;
};

// For each primitive, anchored at its supporting point nearest the kernel
// center, selects the in-plane-nearest cloud point(s) in {B} whose motor
// angle differs by at least delta_theta_min and whose distance to the
// primitive plane is at most r_corr. Proximity is measured in the plane
// (not in 3D) so the selection cannot cancel the normal-direction offset
// the residual measures. Primitives without a partner are skipped; throws
// InsufficientOverlapError when nothing pairs up at all.
std::vector<Correspondence> build_correspondences(const MotorStampedCloud& cloud,
                                                  const std::vector<Vec3>& points_B,
                                                  const KdTree& index,
                                                  const std::vector<PlanePrimitive>& primitives,
                                                  const AssociationConfig& config);

// Point-to-plane residual between the two observations:
//   r = n . [ T(point_m, t_m) - T(point_n, t_n) ],  T per the point transform.
// time_offset shifts both timestamps before motor-angle interpolation;
// queries are clamped to the trajectory span.
double residual(const Correspondence& c, const ExtrinsicParams& ext,
                const MotorTrajectory& traj, double time_offset = 0.0);

// Hot-path variant with the extrinsic rotation/translation precomputed.
double residual_cached(const Correspondence& c, const Mat3& r_lm, const Vec3& t_lm,
                       const MotorTrajectory& traj, double time_offset = 0.0);

}  // namespace motocal
