#pragma once

#include <cstdint>
#include <vector>

#include "motocal/cloud.hpp"
#include "motocal/scene.hpp"

namespace motocal {

// Simplified non-repetitive scan pattern: a uniform azimuth sweep crossed
// with fixed elevation lines. Each azimuth step advances the clock, so a
// scan interleaves with the motor rotation.
struct SensorSpec {
  double azimuth_fov_deg = 360.0;
  double elevation_fov_deg = 59.0;
  int rays_per_sweep = 180;   // azimuth steps per sweep
  int elevation_lines = 12;   // rays fired per azimuth step
  double sweep_rate_hz = 10.0;
  double range_sigma = 0.0;   // m, Gaussian noise along the ray
  double range_min = 0.1;     // m
  double range_max = 40.0;

  void validate() const;
};

struct SimulatedScan {
  static constexpr std::uint16_t kClutterId = 0xffff;

  MotorStampedCloud cloud;
  // Per point: index of the source plane patch, or kClutterId for spheres.
  std::vector<std::uint16_t> patch_ids;
};

// Casts rays from the moving LiDAR pose implied by (traj, ext_true) and
// expresses each hit back in {L}, so transforming the output with ext_true
// reconstructs the scene exactly (up to range noise). Deterministic per seed.
// Requires the trajectory to span at least one full motor revolution.
SimulatedScan simulate_scan(const SceneModel& scene, const SensorSpec& sensor,
                            const MotorTrajectory& traj,
                            const ExtrinsicParams& ext_true, std::uint64_t seed);

// Constant-speed encoder log: `revolutions` turns over `duration` seconds,
// sampled at `sample_rate_hz`.
MotorTrajectory make_constant_rate_trajectory(double duration, double revolutions,
                                              double sample_rate_hz = 100.0);

// Distance from a base-frame point to the patch plane (unsigned).
inline double point_to_plane_distance(const Vec3& p_B, const PlanePatch& patch) {
  return std::abs(patch.normal.dot(p_B - patch.point));
}

}  // namespace motocal
