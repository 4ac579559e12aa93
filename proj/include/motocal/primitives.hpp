#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "motocal/cloud.hpp"
#include "motocal/kdtree.hpp"

namespace motocal {

// Voxel-level representative: centroid of the in-voxel points, expressed in
// the base frame under the current extrinsic estimate.
struct VoxelKernel {
  Vec3 center = Vec3::Zero();
  Eigen::Vector3i voxel = Eigen::Vector3i::Zero();
  std::uint32_t member_count = 0;
};

// A fitted local plane plus the quality measures that weight it in the
// calibration objective.
struct PlanePrimitive {
  Vec3 anchor = Vec3::Zero();   // base frame, nearest supporting point
  Vec3 normal = Vec3::UnitZ();  // unit, oriented toward the base origin
  double alpha = 0.0;           // planarity in [0, 1]
  double weight = 0.0;
  Vec3 singular_values = Vec3::Zero();  // descending
  double mean_t = 0.0;          // over supporting neighbors
  double mean_theta = 0.0;
  std::uint32_t anchor_index = 0;  // cloud index of the anchor point
};

// One kernel per occupied voxel holding at least min_support points.
// Kernels are emitted in voxel-index order, so output is deterministic.
std::vector<VoxelKernel> voxel_downsample(const std::vector<Vec3>& points,
                                          double voxel_size, int min_support = 10);

// Neighborhood size k = min(k_max, floor(gamma * total_points)), floored at
// 3 (the algebraic minimum for a plane fit).
std::size_t adaptive_k(std::size_t total_points, double gamma, std::size_t k_max);

// Distance weight for a neighbor at squared distance d_sq from the kernel
// center, given the maximum squared distance in the set: 1 - sqrt(d/d_max).
inline double distance_weight(double d_sq, double d_max_sq) {
  return 1.0 - std::sqrt(d_sq / d_max_sq);
}

// Planarity from the descending singular values of the local covariance.
inline double planarity(double s0, double s1, double s2) {
  return 2.0 * (s1 - s2) / (s0 + s1 + s2);
}

struct PlaneFit {
  Vec3 normal = Vec3::UnitZ();
  Vec3 singular_values = Vec3::Zero();  // descending
  double alpha = 0.0;
};

// Distance-weighted covariance of the neighbors, eigen-decomposed; the
// normal is the direction of least weighted spread, oriented toward the
// base origin. Throws DegenerateGeometryError on rank-deficient input.
// With distance_weighting off all neighbors weigh equally (baseline mode).
PlaneFit fit_plane_weighted(const std::vector<Vec3>& neighbors,
                            const Vec3& kernel_center,
                            bool distance_weighting = true);

// Retains candidates with alpha >= planarity_min and sigma0/sigma2 <=
// cond_max, and assigns weight = alpha. cond_max = +inf disables the
// condition gate (useful on noiseless synthetic data where sigma2 == 0).
std::vector<PlanePrimitive> filter_primitives(std::vector<PlanePrimitive> candidates,
                                              double planarity_min, double cond_max);

// (theta, phi) with theta = arccos(n_z) in [0, pi], phi = atan2(n_y, n_x).
std::pair<double, double> normal_to_polar(const Vec3& n);

struct PolarBin {
  int theta = 0;
  int phi = 0;
};

PolarBin polar_bin_of(const Vec3& n, double bin_width_deg);

// Subsamples over-full orientation bins so no normal direction dominates:
// bins with count above the mean over non-empty bins are reduced to
// ceil(mean). Deterministic per seed; input order preserved among survivors.
std::vector<PlanePrimitive> homogenize_normals(const std::vector<PlanePrimitive>& primitives,
                                               double bin_width_deg, std::uint64_t seed);

struct ExtractionConfig {
  double voxel_size = 1.0;  // m
  int min_voxel_support = 10;
  double gamma = 0.01;
  int k_max = 50;
  double planarity_min = 0.5;
  double cond_max = 100.0;
  bool distance_weighting = true;  // baseline mode turns this off
  bool unit_weights = false;       // baseline mode: w_i = 1 instead of alpha
  int workers = 0;                 // 0 = hardware concurrency
};

struct ExtractionResult {
  std::vector<PlanePrimitive> primitives;
  std::size_t kernel_count = 0;   // voxel kernels before fitting
  std::size_t fit_failures = 0;   // degenerate neighborhoods skipped
};

// Full extraction pass over a cloud already transformed into the base frame
// under the current estimate: voxel kernels -> adaptive kNN -> weighted fit
// -> planarity/condition filter. `index` must be built over `points_B`.
ExtractionResult extract_primitives(const MotorStampedCloud& cloud,
                                    const std::vector<Vec3>& points_B,
                                    const KdTree& index,
                                    const ExtractionConfig& config);

// Debug dump: ax,ay,az,nx,ny,nz,alpha,weight,theta_bin,phi_bin.
void dump_primitives_csv(const std::vector<PlanePrimitive>& primitives,
                         double bin_width_deg, const std::string& path);

}  // namespace motocal
