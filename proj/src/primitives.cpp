#include "motocal/primitives.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "motocal/parallel.hpp"

namespace motocal {

namespace {

// 21 bits per axis, offset to keep keys non-negative.
constexpr int kVoxelOffset = 1 << 20;

std::int64_t pack_voxel(const Eigen::Vector3i& v) {
  return ((static_cast<std::int64_t>(v.x()) + kVoxelOffset) << 42) |
         ((static_cast<std::int64_t>(v.y()) + kVoxelOffset) << 21) |
         (static_cast<std::int64_t>(v.z()) + kVoxelOffset);
}

Eigen::Vector3i unpack_voxel(std::int64_t key) {
  return {static_cast<int>((key >> 42) & 0x1fffff) - kVoxelOffset,
          static_cast<int>((key >> 21) & 0x1fffff) - kVoxelOffset,
          static_cast<int>(key & 0x1fffff) - kVoxelOffset};
}

}  // namespace

std::vector<VoxelKernel> voxel_downsample(const std::vector<Vec3>& points,
                                          double voxel_size, int min_support) {
  if (voxel_size <= 0.0) throw InputError("voxel size must be positive");
  if (min_support < 1) throw InputError("minimum voxel support must be >= 1");
  if (points.empty()) throw EmptyInputError("cannot voxelize an empty cloud");

  std::vector<std::pair<std::int64_t, std::uint32_t>> keyed(points.size());
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector3i v(static_cast<int>(std::floor(points[i].x() / voxel_size)),
                            static_cast<int>(std::floor(points[i].y() / voxel_size)),
                            static_cast<int>(std::floor(points[i].z() / voxel_size)));
    keyed[i] = {pack_voxel(v), i};
  }
  std::sort(keyed.begin(), keyed.end());

  std::vector<VoxelKernel> kernels;
  std::size_t run_begin = 0;
  for (std::size_t i = 1; i <= keyed.size(); ++i) {
    if (i < keyed.size() && keyed[i].first == keyed[run_begin].first) continue;
    const std::size_t count = i - run_begin;
    if (count >= static_cast<std::size_t>(min_support)) {
      Vec3 sum = Vec3::Zero();
      for (std::size_t j = run_begin; j < i; ++j) sum += points[keyed[j].second];
      kernels.push_back({sum / static_cast<double>(count),
                         unpack_voxel(keyed[run_begin].first),
                         static_cast<std::uint32_t>(count)});
    }
    run_begin = i;
  }
  if (kernels.empty()) {
    throw EmptyInputError("no voxel holds the minimum support of " +
                          std::to_string(min_support) + " points");
  }
  return kernels;
}

std::size_t adaptive_k(std::size_t total_points, double gamma, std::size_t k_max) {
  if (total_points < 1) throw InputError("adaptive_k needs at least one point");
  const auto scaled = static_cast<std::size_t>(
      std::floor(gamma * static_cast<double>(total_points)));
  return std::max<std::size_t>(3, std::min(k_max, scaled));
}

PlaneFit fit_plane_weighted(const std::vector<Vec3>& neighbors,
                            const Vec3& kernel_center, bool distance_weighting) {
  if (neighbors.size() < 3) {
    throw DegenerateGeometryError("plane fit needs at least 3 neighbors, got " +
                                  std::to_string(neighbors.size()));
  }
  std::vector<double> weights(neighbors.size(), 1.0);
  if (distance_weighting) {
    double d_max_sq = 0.0;
    std::vector<double> d_sq(neighbors.size());
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
      d_sq[i] = (neighbors[i] - kernel_center).squaredNorm();
      d_max_sq = std::max(d_max_sq, d_sq[i]);
    }
    if (d_max_sq <= 0.0) {
      throw DegenerateGeometryError("all neighbors coincide with the kernel center");
    }
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
      weights[i] = distance_weight(d_sq[i], d_max_sq);
    }
  }

  double w_sum = 0.0;
  Vec3 mean = Vec3::Zero();
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    w_sum += weights[i];
    mean += weights[i] * neighbors[i];
  }
  if (w_sum <= 0.0) {
    throw DegenerateGeometryError("distance weights sum to zero (equidistant neighbors)");
  }
  mean /= w_sum;

  Mat3 cov = Mat3::Zero();
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    const Vec3 d = neighbors[i] - mean;
    cov += weights[i] * (d * d.transpose());
  }
  cov /= w_sum;

  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 evals = eig.eigenvalues().cwiseMax(0.0);  // ascending
  PlaneFit fit;
  fit.singular_values = {evals[2], evals[1], evals[0]};
  if (fit.singular_values[0] <= 0.0) {
    throw DegenerateGeometryError("rank-deficient neighborhood (all points coincident)");
  }
  fit.alpha = planarity(fit.singular_values[0], fit.singular_values[1],
                        fit.singular_values[2]);
  fit.normal = eig.eigenvectors().col(0);
  // Fixed sign convention stabilizes polar binning: face the base origin.
  if (fit.normal.dot(kernel_center) > 0.0) fit.normal = -fit.normal;
  return fit;
}

std::vector<PlanePrimitive> filter_primitives(std::vector<PlanePrimitive> candidates,
                                              double planarity_min, double cond_max) {
  std::vector<PlanePrimitive> retained;
  retained.reserve(candidates.size());
  for (auto& c : candidates) {
    if (c.alpha < planarity_min) continue;
    if (!std::isinf(cond_max) &&
        c.singular_values[0] > cond_max * c.singular_values[2]) {
      continue;
    }
    c.weight = c.alpha;  // w_i = alpha_i
    retained.push_back(c);
  }
  return retained;
}

std::pair<double, double> normal_to_polar(const Vec3& n) {
  const double theta = std::acos(std::clamp(n.z(), -1.0, 1.0));
  const double phi = std::atan2(n.y(), n.x());
  return {theta, phi};
}

PolarBin polar_bin_of(const Vec3& n, double bin_width_deg) {
  const double bw = bin_width_deg * M_PI / 180.0;
  const auto [theta, phi] = normal_to_polar(n);
  const int n_theta = static_cast<int>(std::lround(180.0 / bin_width_deg));
  const int n_phi = static_cast<int>(std::lround(360.0 / bin_width_deg));
  PolarBin bin;
  bin.theta = std::min(n_theta - 1, static_cast<int>(theta / bw));
  bin.phi = std::min(n_phi - 1, static_cast<int>((phi + M_PI) / bw));
  return bin;
}

std::vector<PlanePrimitive> homogenize_normals(const std::vector<PlanePrimitive>& primitives,
                                               double bin_width_deg, std::uint64_t seed) {
  if (bin_width_deg <= 0.0) throw InputError("bin width must be positive");
  const double n_theta_f = 180.0 / bin_width_deg;
  if (std::abs(n_theta_f - std::lround(n_theta_f)) > 1e-9) {
    throw InputError("bin width must divide 180 evenly, got " +
                     std::to_string(bin_width_deg));
  }
  const int n_theta = static_cast<int>(std::lround(n_theta_f));
  const int n_phi = 2 * n_theta;
  if (primitives.empty()) return {};

  std::vector<std::vector<std::uint32_t>> bins(
      static_cast<std::size_t>(n_theta) * n_phi);
  for (std::uint32_t i = 0; i < primitives.size(); ++i) {
    const PolarBin b = polar_bin_of(primitives[i].normal, bin_width_deg);
    bins[static_cast<std::size_t>(b.theta) * n_phi + b.phi].push_back(i);
  }

  std::size_t non_empty = 0, total = 0;
  for (const auto& bin : bins) {
    if (bin.empty()) continue;
    ++non_empty;
    total += bin.size();
  }
  const double mean_count = static_cast<double>(total) / static_cast<double>(non_empty);
  const auto cap = static_cast<std::size_t>(std::ceil(mean_count));

  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> retained;
  retained.reserve(primitives.size());
  for (auto& bin : bins) {
    if (bin.empty()) continue;
    if (static_cast<double>(bin.size()) > mean_count) {
      // Partial Fisher-Yates: uniform sample of `cap` indices without
      // replacement, then restore input order among survivors.
      for (std::size_t i = 0; i < cap; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, bin.size() - 1);
        std::swap(bin[i], bin[pick(rng)]);
      }
      bin.resize(cap);
      std::sort(bin.begin(), bin.end());
    }
    retained.insert(retained.end(), bin.begin(), bin.end());
  }
  std::sort(retained.begin(), retained.end());

  std::vector<PlanePrimitive> out;
  out.reserve(retained.size());
  for (std::uint32_t idx : retained) out.push_back(primitives[idx]);
  return out;
}

ExtractionResult extract_primitives(const MotorStampedCloud& cloud,
                                    const std::vector<Vec3>& points_B,
                                    const KdTree& index,
                                    const ExtractionConfig& config) {
  if (cloud.size() != points_B.size() || index.size() != points_B.size()) {
    throw Error("extract_primitives: cloud, transformed points, and index disagree");
  }
  const std::vector<VoxelKernel> kernels =
      voxel_downsample(points_B, config.voxel_size, config.min_voxel_support);
  const std::size_t k =
      adaptive_k(points_B.size(), config.gamma, static_cast<std::size_t>(config.k_max));

  constexpr std::size_t kChunk = 64;
  const std::size_t nchunks = num_chunks(kernels.size(), kChunk);
  std::vector<std::vector<PlanePrimitive>> chunk_candidates(nchunks);
  std::vector<std::size_t> chunk_failures(nchunks, 0);

  parallel_chunks(kernels.size(), config.workers, kChunk,
                  [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::vector<Vec3> neighbors;
    neighbors.reserve(k);
    for (std::size_t i = begin; i < end; ++i) {
      const VoxelKernel& kernel = kernels[i];
      const auto hits = index.knn(kernel.center, k);
      if (hits.size() < 3) {
        ++chunk_failures[chunk];
        continue;
      }
      neighbors.clear();
      for (const auto& h : hits) neighbors.push_back(points_B[h.index]);
      PlaneFit fit;
      try {
        fit = fit_plane_weighted(neighbors, kernel.center, config.distance_weighting);
      } catch (const DegenerateGeometryError&) {
        ++chunk_failures[chunk];
        continue;
      }
      PlanePrimitive prim;
      prim.anchor_index = hits.front().index;  // supporting point nearest the center
      prim.anchor = points_B[prim.anchor_index];
      prim.normal = fit.normal;
      prim.alpha = fit.alpha;
      prim.weight = fit.alpha;
      prim.singular_values = fit.singular_values;
      double t_sum = 0.0, theta_sum = 0.0;
      for (const auto& h : hits) {
        t_sum += cloud.points[h.index].t;
        theta_sum += cloud.points[h.index].theta;
      }
      prim.mean_t = t_sum / static_cast<double>(hits.size());
      prim.mean_theta = theta_sum / static_cast<double>(hits.size());
      chunk_candidates[chunk].push_back(prim);
    }
  });

  ExtractionResult result;
  result.kernel_count = kernels.size();
  std::vector<PlanePrimitive> candidates;
  for (std::size_t c = 0; c < nchunks; ++c) {
    result.fit_failures += chunk_failures[c];
    candidates.insert(candidates.end(), chunk_candidates[c].begin(),
                      chunk_candidates[c].end());
  }
  result.primitives =
      filter_primitives(std::move(candidates), config.planarity_min, config.cond_max);
  if (config.unit_weights) {
    for (auto& p : result.primitives) p.weight = 1.0;
  }
  return result;
}

void dump_primitives_csv(const std::vector<PlanePrimitive>& primitives,
                         double bin_width_deg, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InputError("cannot write primitives dump: " + path);
  std::fputs("ax,ay,az,nx,ny,nz,alpha,weight,theta_bin,phi_bin\n", out);
  for (const auto& p : primitives) {
    const PolarBin bin = polar_bin_of(p.normal, bin_width_deg);
    std::fprintf(out, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n",
                 p.anchor.x(), p.anchor.y(), p.anchor.z(), p.normal.x(), p.normal.y(),
                 p.normal.z(), p.alpha, p.weight, bin.theta, bin.phi);
  }
  std::fclose(out);
}

}  // namespace motocal
