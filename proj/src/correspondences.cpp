#include "motocal/correspondences.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "motocal/parallel.hpp"

namespace motocal {

std::vector<Correspondence> build_correspondences(const MotorStampedCloud& cloud,
                                                  const std::vector<Vec3>& points_B,
                                                  const KdTree& index,
                                                  const std::vector<PlanePrimitive>& primitives,
                                                  const AssociationConfig& config) {
  if (primitives.empty()) {
    throw DegenerateGeometryError("no primitives to associate");
  }
  if (config.delta_theta_min <= 0.0 || config.r_corr <= 0.0 ||
      config.pairs_per_primitive < 1) {
    throw InputError("association gates must be positive");
  }

  constexpr std::size_t kChunk = 128;
  const std::size_t nchunks = num_chunks(primitives.size(), kChunk);
  std::vector<std::vector<Correspondence>> chunk_out(nchunks);

  // Partner proximity is ranked by IN-PLANE distance, never by full 3D
  // distance: a continuously swept sensor observes every surface spot at all
  // normal offsets, so the 3D-nearest cross-angle point is the one whose
  // normal offset happens to vanish under the current estimate - selecting
  // it zeroes the very quantity the residual must measure. Candidates come
  // from a 3D kNN pool wide enough to contain the in-plane-nearest points.
  const std::size_t pool =
      std::max<std::size_t>(32, 4 * static_cast<std::size_t>(config.pairs_per_primitive));

  parallel_chunks(primitives.size(), config.workers, kChunk,
                  [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    // (in-plane sq dist, candidate index), best-first
    std::vector<std::pair<double, std::uint32_t>> ranked;
    for (std::size_t i = begin; i < end; ++i) {
      const PlanePrimitive& prim = primitives[i];
      const StampedPoint& anchor = cloud.points[prim.anchor_index];
      const double theta_n = anchor.theta;
      const auto cross_angle = [&](std::uint32_t idx) {
        return idx != prim.anchor_index &&
               std::abs(wrap_angle(cloud.points[idx].theta - theta_n)) >=
                   config.delta_theta_min;
      };
      const auto hits = index.knn_if(prim.anchor, pool, cross_angle);
      ranked.clear();
      for (const auto& hit : hits) {
        const Vec3 offset = points_B[hit.index] - prim.anchor;
        const double d_normal = prim.normal.dot(offset);
        // Reject partners straddling a different surface.
        if (std::abs(d_normal) > config.r_corr) continue;
        ranked.emplace_back(offset.squaredNorm() - d_normal * d_normal, hit.index);
      }
      const std::size_t take =
          std::min<std::size_t>(config.pairs_per_primitive, ranked.size());
      std::partial_sort(ranked.begin(), ranked.begin() + take, ranked.end());
      for (std::size_t j = 0; j < take; ++j) {
        const StampedPoint& partner = cloud.points[ranked[j].second];
        Correspondence c;
        c.normal = prim.normal;
        c.point_n = anchor.p_L;
        c.t_n = anchor.t;
        c.theta_n = anchor.theta;
        c.point_m = partner.p_L;
        c.t_m = partner.t;
        c.theta_m = partner.theta;
        c.weight = prim.weight;
        chunk_out[chunk].push_back(c);
      }
    }
  });

  std::vector<Correspondence> out;
  for (auto& chunk : chunk_out) {
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  if (out.empty()) {
    throw InsufficientOverlapError(
        "no cross-angle correspondences: the motor sweep never revisited a "
        "surface at an angle separation of " +
        std::to_string(config.delta_theta_min) + " rad");
  }
  return out;
}

double residual_cached(const Correspondence& c, const Mat3& r_lm, const Vec3& t_lm,
                       const MotorTrajectory& traj, double time_offset) {
  const Mat3 r_m = rot_z(traj.angle_at_clamped(c.t_m + time_offset));
  const Mat3 r_n = rot_z(traj.angle_at_clamped(c.t_n + time_offset));
  const Vec3 p_m = r_m * (r_lm * c.point_m + t_lm);
  const Vec3 p_n = r_n * (r_lm * c.point_n + t_lm);
  return c.normal.dot(p_m - p_n);
}

double residual(const Correspondence& c, const ExtrinsicParams& ext,
                const MotorTrajectory& traj, double time_offset) {
  return residual_cached(c, ext.rotation(), ext.translation(), traj, time_offset);
}

}  // namespace motocal
