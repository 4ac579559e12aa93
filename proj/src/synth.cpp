#include "motocal/synth.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace motocal {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

struct RayHit {
  double range = 0.0;
  std::uint16_t patch_id = SimulatedScan::kClutterId;
  bool valid = false;
};

// Nearest intersection of o + s*d (s > 0) with the scene.
RayHit cast_ray(const SceneModel& scene, const Vec3& origin, const Vec3& dir) {
  RayHit hit;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scene.planes.size(); ++i) {
    const PlanePatch& patch = scene.planes[i];
    const double denom = dir.dot(patch.normal);
    if (std::abs(denom) < 1e-12) continue;
    const double s = (patch.point - origin).dot(patch.normal) / denom;
    if (s <= 0.0 || s >= best) continue;
    const Vec3 q = origin + s * dir - patch.point;
    if (std::abs(q.dot(patch.axis_u)) > patch.half_u ||
        std::abs(q.dot(patch.axis_v)) > patch.half_v) {
      continue;
    }
    best = s;
    hit = {s, static_cast<std::uint16_t>(i), true};
  }
  for (const auto& sphere : scene.spheres) {
    const Vec3 oc = origin - sphere.center;
    const double b = oc.dot(dir);
    const double c = oc.squaredNorm() - sphere.radius * sphere.radius;
    const double disc = b * b - c;
    if (disc < 0.0) continue;
    const double sqrt_disc = std::sqrt(disc);
    double s = -b - sqrt_disc;
    if (s <= 0.0) s = -b + sqrt_disc;
    if (s <= 0.0 || s >= best) continue;
    best = s;
    hit = {s, SimulatedScan::kClutterId, true};
  }
  return hit;
}

}  // namespace

void SensorSpec::validate() const {
  if (azimuth_fov_deg <= 0.0 || elevation_fov_deg <= 0.0) {
    throw InputError("sensor FOVs must be positive");
  }
  if (rays_per_sweep < 1 || elevation_lines < 1 || sweep_rate_hz <= 0.0) {
    throw InputError("sensor ray pattern parameters must be positive");
  }
  if (range_sigma < 0.0) throw InputError("range noise sigma must be non-negative");
  if (range_min <= 0.0 || range_max <= range_min) {
    throw InputError("sensor range limits must satisfy 0 < min < max");
  }
}

MotorTrajectory make_constant_rate_trajectory(double duration, double revolutions,
                                              double sample_rate_hz) {
  if (duration <= 0.0 || revolutions <= 0.0 || sample_rate_hz <= 0.0) {
    throw InputError("trajectory duration, revolutions, and rate must be positive");
  }
  MotorTrajectory traj;
  const auto n = static_cast<std::size_t>(std::ceil(duration * sample_rate_hz));
  traj.samples.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = duration * static_cast<double>(i) / static_cast<double>(n);
    traj.samples.push_back({t, 2.0 * M_PI * revolutions * t / duration});
  }
  return traj;
}

SimulatedScan simulate_scan(const SceneModel& scene, const SensorSpec& sensor,
                            const MotorTrajectory& traj,
                            const ExtrinsicParams& ext_true, std::uint64_t seed) {
  sensor.validate();
  traj.validate();
  const double angle_span =
      std::abs(traj.samples.back().angle - traj.samples.front().angle);
  if (angle_span < 2.0 * M_PI - 1e-9) {
    throw InputError("trajectory must span a full motor revolution for panoramic "
                     "coverage (got " + std::to_string(angle_span) + " rad)");
  }
  if (scene.planes.empty() && scene.spheres.empty()) {
    throw EmptyInputError("scene has no geometry");
  }

  const Mat3 r_lm = ext_true.rotation();
  const Vec3 t_lm = ext_true.translation();
  const double az_fov = sensor.azimuth_fov_deg * kDegToRad;
  const double el_fov = sensor.elevation_fov_deg * kDegToRad;

  std::vector<Vec3> ray_dirs;  // per (azimuth step, elevation line), in {L}
  ray_dirs.reserve(static_cast<std::size_t>(sensor.rays_per_sweep) *
                   sensor.elevation_lines);
  for (int j = 0; j < sensor.rays_per_sweep; ++j) {
    const double az = -az_fov / 2 + az_fov * (j + 0.5) / sensor.rays_per_sweep;
    for (int i = 0; i < sensor.elevation_lines; ++i) {
      const double el = -el_fov / 2 + el_fov * (i + 0.5) / sensor.elevation_lines;
      ray_dirs.emplace_back(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                            std::sin(el));
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  const double t0 = traj.t_begin();
  const double duration = traj.t_end() - t0;
  const int n_sweeps = std::max(1, static_cast<int>(duration * sensor.sweep_rate_hz));

  SimulatedScan scan;
  scan.cloud.source_id = "synthetic";
  for (int s = 0; s < n_sweeps; ++s) {
    for (int j = 0; j < sensor.rays_per_sweep; ++j) {
      const double t = t0 + (s + static_cast<double>(j) / sensor.rays_per_sweep) /
                                sensor.sweep_rate_hz;
      const Mat3 r_mb = motor_rotation(traj, t);
      const Vec3 origin_B = r_mb * t_lm;
      const Mat3 dir_to_B = r_mb * r_lm;
      const double theta = traj.angle_at(t);
      for (int i = 0; i < sensor.elevation_lines; ++i) {
        const Vec3& d_L = ray_dirs[static_cast<std::size_t>(j) * sensor.elevation_lines + i];
        const RayHit hit = cast_ray(scene, origin_B, dir_to_B * d_L);
        if (!hit.valid || hit.range < sensor.range_min || hit.range > sensor.range_max) {
          continue;
        }
        double range = hit.range;
        if (sensor.range_sigma > 0.0) range += sensor.range_sigma * noise(rng);
        scan.cloud.points.push_back({range * d_L, t, theta});
        scan.patch_ids.push_back(hit.patch_id);
      }
    }
  }
  if (scan.cloud.empty()) {
    throw EmptyInputError("no ray intersected the scene within sensor range");
  }
  return scan;
}

}  // namespace motocal
