#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "motocal/geometry.hpp"

namespace motocal {

// Finite rectangular patch: center point, unit normal, and two orthonormal
// in-plane axes with half-extents (axis_v = normal x axis_u).
struct PlanePatch {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 axis_u = Vec3::UnitX();
  Vec3 axis_v = Vec3::UnitY();
  double half_u = 1.0;  // m
  double half_v = 1.0;
};

struct ClutterSphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.5;  // m
};

struct SceneModel {
  std::vector<PlanePatch> planes;
  std::vector<ClutterSphere> spheres;
};

// Derives in-plane axes deterministically from the normal.
PlanePatch make_patch(const Vec3& point, const Vec3& normal, double half_u,
                      double half_v);

// Six axis-aligned patches (floor, ceiling, four walls) with outward
// normals. The sensor sits at the base origin, 1 m above the floor.
SceneModel make_room_scene(double width, double depth, double height);

// Randomized oriented patches in a 6-10 m radial band facing the sensor,
// plus clutter spheres in a disjoint 2-5 m band. Deterministic per seed.
SceneModel make_sparse_scene(int n_planes, int n_clutter, std::uint64_t seed);

// Structured text with repeated `plane { ... }` / `sphere { ... }` blocks.
SceneModel read_scene(const std::string& path);
void write_scene(const SceneModel& scene, const std::string& path);

}  // namespace motocal
