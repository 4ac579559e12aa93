#include "motocal/evaluation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace motocal {

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void accumulate_mean_std(const std::vector<double>& values, double& mean, double& stddev) {
  mean = 0.0;
  stddev = 0.0;
  if (values.empty()) return;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

double plane_fitting_error(const std::vector<Vec3>& points) {
  if (points.size() < 3) {
    throw DegenerateGeometryError("plane fitting error needs at least 3 points, got " +
                                  std::to_string(points.size()));
  }
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 evals = eig.eigenvalues().cwiseMax(0.0);  // ascending
  if (evals[1] <= 1e-12 * std::max(evals[2], 1e-300)) {
    throw DegenerateGeometryError("collinear points: best-fit plane is not unique");
  }
  // Smallest eigenvalue of the /N covariance == mean squared orthogonal distance.
  return evals[0];
}

std::vector<Region> read_regions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open regions file: " + path);
  std::vector<Region> regions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream iss(line);
    Region r;
    if (!(iss >> r.name) || r.name[0] == '#') continue;
    if (!(iss >> r.lo.x() >> r.lo.y() >> r.lo.z() >> r.hi.x() >> r.hi.y() >> r.hi.z())) {
      throw ParseError(path, line_no, "expected 'name lo_x lo_y lo_z hi_x hi_y hi_z'");
    }
    if ((r.hi.array() < r.lo.array()).any()) {
      throw ParseError(path, line_no, "region bounds inverted");
    }
    regions.push_back(r);
  }
  return regions;
}

void write_regions(const std::vector<Region>& regions, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InputError("cannot write regions file: " + path);
  std::fputs("# name lo_x lo_y lo_z hi_x hi_y hi_z\n", out);
  for (const auto& r : regions) {
    std::fprintf(out, "%s %.17g %.17g %.17g %.17g %.17g %.17g\n", r.name.c_str(),
                 r.lo.x(), r.lo.y(), r.lo.z(), r.hi.x(), r.hi.y(), r.hi.z());
  }
  std::fclose(out);
}

std::vector<Region> regions_from_scene(const SceneModel& scene, double margin) {
  std::vector<Region> regions;
  for (std::size_t i = 0; i < scene.planes.size(); ++i) {
    const PlanePatch& p = scene.planes[i];
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (double su : {-1.0, 1.0}) {
      for (double sv : {-1.0, 1.0}) {
        const Vec3 corner =
            p.point + su * p.half_u * p.axis_u + sv * p.half_v * p.axis_v;
        lo = lo.cwiseMin(corner);
        hi = hi.cwiseMax(corner);
      }
    }
    Region r;
    r.name = "plane" + std::to_string(i);
    r.lo = lo - Vec3::Constant(margin);
    r.hi = hi + Vec3::Constant(margin);
    regions.push_back(r);
  }
  return regions;
}

PlaneFitReport evaluate_plane_fit(const MotorStampedCloud& cloud,
                                  const ExtrinsicParams& ext,
                                  const std::vector<Region>& regions) {
  if (cloud.empty()) throw EmptyInputError("cannot evaluate an empty cloud");
  std::vector<Vec3> points_B(cloud.size());
  const Mat3 r_lm = ext.rotation();
  const Vec3 t_lm = ext.translation();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const StampedPoint& pt = cloud.points[i];
    points_B[i] = rot_z(pt.theta) * (r_lm * pt.p_L + t_lm);
  }

  std::vector<Region> effective = regions;
  if (effective.empty()) {
    Region all;
    all.name = "all";
    all.lo = Vec3::Constant(-std::numeric_limits<double>::infinity());
    all.hi = Vec3::Constant(std::numeric_limits<double>::infinity());
    effective.push_back(all);
  }

  PlaneFitReport report;
  double weighted_sq_sum = 0.0;
  for (const auto& region : effective) {
    std::vector<Vec3> members;
    for (const auto& p : points_B) {
      if (region.contains(p)) members.push_back(p);
    }
    RegionError err;
    err.name = region.name;
    err.point_count = members.size();
    try {
      err.mse = plane_fitting_error(members);
    } catch (const DegenerateGeometryError&) {
      err.degenerate = true;
    }
    if (!err.degenerate) {
      weighted_sq_sum += err.mse * static_cast<double>(err.point_count);
      report.total_points += err.point_count;
    }
    report.regions.push_back(err);
  }
  if (report.total_points > 0) {
    report.aggregate_mse = weighted_sq_sum / static_cast<double>(report.total_points);
  }
  return report;
}

void write_plane_fit_csv(const PlaneFitReport& report, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InputError("cannot write plane-fit report: " + path);
  std::fputs("region,points,mse_m2,rms_m,status\n", out);
  for (const auto& r : report.regions) {
    if (r.degenerate) {
      std::fprintf(out, "%s,%zu,,,degenerate\n", r.name.c_str(), r.point_count);
    } else {
      std::fprintf(out, "%s,%zu,%.17g,%.17g,ok\n", r.name.c_str(), r.point_count,
                   r.mse, std::sqrt(r.mse));
    }
  }
  std::fprintf(out, "aggregate,%zu,%.17g,%.17g,ok\n", report.total_points,
               report.aggregate_mse, std::sqrt(report.aggregate_mse));
  std::fclose(out);
}

void write_comparison_csv(const PlaneFitReport& a, const std::string& label_a,
                          const PlaneFitReport& b, const std::string& label_b,
                          const std::string& path) {
  if (a.regions.size() != b.regions.size()) {
    throw InputError("comparison reports cover different region sets");
  }
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InputError("cannot write comparison: " + path);
  std::fprintf(out, "region,mse_%s_m2,mse_%s_m2,ratio\n", label_a.c_str(),
               label_b.c_str());
  for (std::size_t i = 0; i < a.regions.size(); ++i) {
    const RegionError& ra = a.regions[i];
    const RegionError& rb = b.regions[i];
    if (ra.degenerate || rb.degenerate) {
      std::fprintf(out, "%s,,,degenerate\n", ra.name.c_str());
      continue;
    }
    std::fprintf(out, "%s,%.17g,%.17g,%.17g\n", ra.name.c_str(), ra.mse, rb.mse,
                 rb.mse > 0 ? ra.mse / rb.mse : std::numeric_limits<double>::infinity());
  }
  std::fprintf(out, "aggregate,%.17g,%.17g,%.17g\n", a.aggregate_mse, b.aggregate_mse,
               b.aggregate_mse > 0 ? a.aggregate_mse / b.aggregate_mse
                                   : std::numeric_limits<double>::infinity());
  std::fclose(out);
}

StabilityReport stability_analysis(const std::vector<MotorStampedCloud>& batches,
                                   const MotorTrajectory& traj,
                                   const RunConfig& config) {
  if (batches.size() < 2) {
    throw InputError("stability analysis needs at least 2 batches");
  }
  StabilityReport report;
  std::vector<double> rolls, pitches, txs, tys;
  for (std::size_t i = 0; i < batches.size(); ++i) {
    const CalibrationReport calib = calibrate(batches[i], traj, config);
    StabilityBatch row;
    row.batch = i;
    row.ext = calib.result.ext;
    row.converged = calib.result.converged;
    report.batches.push_back(row);
    rolls.push_back(row.ext.roll);
    pitches.push_back(row.ext.pitch);
    txs.push_back(row.ext.tx);
    tys.push_back(row.ext.ty);
  }
  accumulate_mean_std(rolls, report.mean_roll, report.std_roll);
  accumulate_mean_std(pitches, report.mean_pitch, report.std_pitch);
  accumulate_mean_std(txs, report.mean_tx, report.std_tx);
  accumulate_mean_std(tys, report.mean_ty, report.std_ty);
  return report;
}

void write_stability_csv(const StabilityReport& limo, const StabilityReport& vanilla,
                         const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InputError("cannot write stability report: " + path);
  std::fputs("mode,batch,roll_rad,pitch_rad,tx_m,ty_m,converged\n", out);
  for (const auto* rep : {&limo, &vanilla}) {
    const char* mode = rep == &limo ? "limo" : "vanilla";
    for (const auto& b : rep->batches) {
      std::fprintf(out, "%s,%zu,%.17g,%.17g,%.17g,%.17g,%d\n", mode, b.batch,
                   b.ext.roll, b.ext.pitch, b.ext.tx, b.ext.ty, b.converged ? 1 : 0);
    }
  }
  std::fputs("mode,stat,roll_rad,pitch_rad,tx_m,ty_m,\n", out);
  for (const auto* rep : {&limo, &vanilla}) {
    const char* mode = rep == &limo ? "limo" : "vanilla";
    std::fprintf(out, "%s,mean,%.17g,%.17g,%.17g,%.17g,\n", mode, rep->mean_roll,
                 rep->mean_pitch, rep->mean_tx, rep->mean_ty);
    std::fprintf(out, "%s,std,%.17g,%.17g,%.17g,%.17g,\n", mode, rep->std_roll,
                 rep->std_pitch, rep->std_tx, rep->std_ty);
  }
  std::fclose(out);
}

SweepGrid parameter_sweep(const MotorStampedCloud& cloud, const MotorTrajectory& traj,
                          const std::vector<Region>& regions,
                          const RunConfig& base_config, const SweepSpec& spec) {
  if (spec.voxel_sizes.empty() || spec.planarity_thresholds.empty()) {
    throw InputError("sweep grid must name at least one voxel size and one threshold");
  }
  SweepGrid grid;
  for (double voxel : spec.voxel_sizes) {
    for (double planarity : spec.planarity_thresholds) {
      SweepCell cell;
      cell.voxel_size = voxel;
      cell.planarity_min = planarity;
      RunConfig config = base_config;
      config.voxel_size = voxel;
      config.planarity_min = planarity;
      const double t0 = now_s();
      try {
        config.validate();
        const CalibrationReport calib = calibrate(cloud, traj, config);
        cell.ext = calib.result.ext;
        cell.mse = evaluate_plane_fit(cloud, calib.result.ext, regions).aggregate_mse;
        cell.ok = true;
        if (!calib.result.converged) {
          cell.ok = false;
          cell.error = "not_converged";
        }
      } catch (const InsufficientOverlapError&) {
        cell.error = "insufficient_overlap";
      } catch (const DegenerateGeometryError&) {
        cell.error = "degenerate_geometry";
      } catch (const EmptyInputError&) {
        cell.error = "empty_result";
      } catch (const InputError&) {
        cell.error = "input_error";
      }
      cell.runtime_s = now_s() - t0;
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

void write_sweep_csv(const SweepGrid& grid, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InputError("cannot write sweep grid: " + path);
  std::fputs("voxel_size,planarity_min,status,mse_m2,runtime_s,roll_rad,pitch_rad,tx_m,ty_m\n",
             out);
  for (const auto& c : grid.cells) {
    if (c.ok) {
      std::fprintf(out, "%.17g,%.17g,ok,%.17g,%.6f,%.17g,%.17g,%.17g,%.17g\n",
                   c.voxel_size, c.planarity_min, c.mse, c.runtime_s, c.ext.roll,
                   c.ext.pitch, c.ext.tx, c.ext.ty);
    } else {
      std::fprintf(out, "%.17g,%.17g,%s,,%.6f,,,,\n", c.voxel_size, c.planarity_min,
                   c.error.c_str(), c.runtime_s);
    }
  }
  std::fclose(out);
}

}  // namespace motocal
