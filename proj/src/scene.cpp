#include "motocal/scene.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace motocal {

namespace {

constexpr double kSensorHeightAboveFloor = 1.0;  // m

Vec3 parse_vec3(std::istringstream& iss, const std::string& path, std::size_t line_no) {
  Vec3 v;
  if (!(iss >> v.x() >> v.y() >> v.z())) {
    throw ParseError(path, line_no, "expected three numbers");
  }
  return v;
}

}  // namespace

PlanePatch make_patch(const Vec3& point, const Vec3& normal, double half_u,
                      double half_v) {
  if (half_u <= 0.0 || half_v <= 0.0) {
    throw InputError("patch half-extents must be positive");
  }
  const double norm = normal.norm();
  if (norm < 1e-12) throw InputError("patch normal must be nonzero");
  PlanePatch patch;
  patch.point = point;
  patch.normal = normal / norm;
  // Least-aligned basis axis keeps the cross product well-conditioned.
  int dim = 0;
  patch.normal.cwiseAbs().minCoeff(&dim);
  patch.axis_u = patch.normal.cross(Vec3::Unit(dim)).normalized();
  patch.axis_v = patch.normal.cross(patch.axis_u);
  patch.half_u = half_u;
  patch.half_v = half_v;
  return patch;
}

SceneModel make_room_scene(double width, double depth, double height) {
  if (width <= 0.0 || depth <= 0.0 || height <= 0.0) {
    throw InputError("room dimensions must be positive");
  }
  const double z_floor = -kSensorHeightAboveFloor;
  const double z_ceiling = height - kSensorHeightAboveFloor;
  const double z_mid = 0.5 * (z_floor + z_ceiling);

  auto patch = [](Vec3 point, Vec3 normal, Vec3 axis_u, double half_u, double half_v) {
    PlanePatch p;
    p.point = point;
    p.normal = normal;
    p.axis_u = axis_u;
    p.axis_v = normal.cross(axis_u);
    p.half_u = half_u;
    p.half_v = half_v;
    return p;
  };

  SceneModel scene;
  scene.planes.push_back(patch({0, 0, z_floor}, {0, 0, -1}, {1, 0, 0},
                               width / 2, depth / 2));
  scene.planes.push_back(patch({0, 0, z_ceiling}, {0, 0, 1}, {1, 0, 0},
                               width / 2, depth / 2));
  scene.planes.push_back(patch({width / 2, 0, z_mid}, {1, 0, 0}, {0, 1, 0},
                               depth / 2, height / 2));
  scene.planes.push_back(patch({-width / 2, 0, z_mid}, {-1, 0, 0}, {0, 1, 0},
                               depth / 2, height / 2));
  scene.planes.push_back(patch({0, depth / 2, z_mid}, {0, 1, 0}, {1, 0, 0},
                               width / 2, height / 2));
  scene.planes.push_back(patch({0, -depth / 2, z_mid}, {0, -1, 0}, {1, 0, 0},
                               width / 2, height / 2));
  return scene;
}

SceneModel make_sparse_scene(int n_planes, int n_clutter, std::uint64_t seed) {
  if (n_planes < 1) throw InputError("sparse scene needs at least 1 plane");
  if (n_clutter < 0) throw InputError("clutter count must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> azimuth(-M_PI, M_PI);
  std::uniform_real_distribution<double> plane_radius(6.0, 10.0);
  std::uniform_real_distribution<double> plane_z(-0.8, 2.0);
  std::uniform_real_distribution<double> extent(1.5, 3.0);
  std::uniform_real_distribution<double> tilt(-0.3, 0.3);
  std::uniform_real_distribution<double> sphere_radius(0.2, 0.6);
  std::uniform_real_distribution<double> sphere_band(2.0, 5.0);
  std::uniform_real_distribution<double> sphere_z(-0.8, 1.5);

  SceneModel scene;
  for (int i = 0; i < n_planes; ++i) {
    const double az = azimuth(rng);
    const double r = plane_radius(rng);
    const Vec3 center(r * std::cos(az), r * std::sin(az), plane_z(rng));
    // Face the sensor, with a random tilt so normals spread over the sphere.
    Vec3 toward = (-center).normalized();
    toward += Vec3(tilt(rng), tilt(rng), tilt(rng));
    scene.planes.push_back(make_patch(center, toward, extent(rng), extent(rng)));
  }
  for (int i = 0; i < n_clutter; ++i) {
    const double az = azimuth(rng);
    const double r = sphere_band(rng);
    scene.spheres.push_back(
        {{r * std::cos(az), r * std::sin(az), sphere_z(rng)}, sphere_radius(rng)});
  }
  return scene;
}

SceneModel read_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scene file: " + path);
  SceneModel scene;
  std::string line;
  std::size_t line_no = 0;
  std::string block;  // "", "plane", or "sphere"
  Vec3 point = Vec3::Zero(), normal = Vec3::UnitZ(), axis_u = Vec3::Zero();
  Vec3 center = Vec3::Zero();
  double half_u = 0, half_v = 0, radius = 0;
  bool has_axis = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream iss(line);
    std::string token;
    if (!(iss >> token) || token[0] == '#') continue;
    if (block.empty()) {
      std::string brace;
      if ((token != "plane" && token != "sphere") || !(iss >> brace) || brace != "{") {
        throw ParseError(path, line_no, "expected 'plane {' or 'sphere {'");
      }
      block = token;
      point = center = Vec3::Zero();
      normal = Vec3::UnitZ();
      axis_u = Vec3::Zero();
      half_u = half_v = radius = 0;
      has_axis = false;
    } else if (token == "}") {
      if (block == "plane") {
        PlanePatch patch = make_patch(point, normal, half_u, half_v);
        if (has_axis) {
          if (std::abs(axis_u.norm() - 1.0) > 1e-9 ||
              std::abs(axis_u.dot(patch.normal)) > 1e-9) {
            throw ParseError(path, line_no, "axis_u must be unit and orthogonal to normal");
          }
          patch.axis_u = axis_u;
          patch.axis_v = patch.normal.cross(axis_u);
        }
        scene.planes.push_back(patch);
      } else {
        if (radius <= 0.0) throw ParseError(path, line_no, "sphere radius must be positive");
        scene.spheres.push_back({center, radius});
      }
      block.clear();
    } else if (block == "plane") {
      if (token == "point") point = parse_vec3(iss, path, line_no);
      else if (token == "normal") normal = parse_vec3(iss, path, line_no);
      else if (token == "axis_u") { axis_u = parse_vec3(iss, path, line_no); has_axis = true; }
      else if (token == "extents") {
        if (!(iss >> half_u >> half_v)) throw ParseError(path, line_no, "expected two extents");
      } else {
        throw ParseError(path, line_no, "unknown plane key: " + token);
      }
    } else {
      if (token == "center") center = parse_vec3(iss, path, line_no);
      else if (token == "radius") {
        if (!(iss >> radius)) throw ParseError(path, line_no, "expected radius");
      } else {
        throw ParseError(path, line_no, "unknown sphere key: " + token);
      }
    }
  }
  if (!block.empty()) throw ParseError(path, line_no, "unterminated block: " + block);
  if (scene.planes.empty() && scene.spheres.empty()) {
    throw EmptyInputError("scene file has no geometry: " + path);
  }
  return scene;
}

void write_scene(const SceneModel& scene, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InputError("cannot write scene file: " + path);
  for (const auto& p : scene.planes) {
    std::fprintf(out,
                 "plane {\n  point %.17g %.17g %.17g\n  normal %.17g %.17g %.17g\n"
                 "  axis_u %.17g %.17g %.17g\n  extents %.17g %.17g\n}\n",
                 p.point.x(), p.point.y(), p.point.z(), p.normal.x(), p.normal.y(),
                 p.normal.z(), p.axis_u.x(), p.axis_u.y(), p.axis_u.z(), p.half_u,
                 p.half_v);
  }
  for (const auto& s : scene.spheres) {
    std::fprintf(out, "sphere {\n  center %.17g %.17g %.17g\n  radius %.17g\n}\n",
                 s.center.x(), s.center.y(), s.center.z(), s.radius);
  }
  std::fclose(out);
}

}  // namespace motocal
