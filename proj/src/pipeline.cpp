#include "motocal/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "motocal/parallel.hpp"

namespace motocal {

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Workspace {
  std::vector<Vec3> points_B;
  KdTree index;
};

}  // namespace

AssociationProvider make_association_provider(const MotorStampedCloud& cloud,
                                              const RunConfig& config,
                                              PipelineStats* stats,
                                              StageTimings* timings) {
  config.validate();
  if (cloud.empty()) throw EmptyInputError("cannot calibrate an empty cloud");
  auto ws = std::make_shared<Workspace>();
  ws->points_B.resize(cloud.size());

  return [&cloud, config, stats, timings, ws](const ExtrinsicParams& est) {
    const double t0 = now_s();
    const Mat3 r_lm = est.rotation();
    const Vec3 t_lm = est.translation();
    parallel_chunks(cloud.size(), config.workers, 4096,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const StampedPoint& pt = cloud.points[i];
        ws->points_B[i] = rot_z(pt.theta) * (r_lm * pt.p_L + t_lm);
      }
    });
    ws->index.build(ws->points_B);

    ExtractionResult extraction =
        extract_primitives(cloud, ws->points_B, ws->index, config.extraction_config());
    std::vector<PlanePrimitive> primitives = std::move(extraction.primitives);
    const std::size_t filtered_count = primitives.size();
    if (config.mode == CalibMode::kLimo) {
      primitives = homogenize_normals(primitives, config.bin_width_deg, config.seed);
    }
    const double t1 = now_s();

    Association assoc;
    assoc.correspondences = build_correspondences(cloud, ws->points_B, ws->index,
                                                  primitives,
                                                  config.association_config());
    const double t2 = now_s();

    assoc.kernel_count = extraction.kernel_count;
    assoc.primitive_count = filtered_count;
    assoc.homogenized_count = primitives.size();
    assoc.time_extract_s = t1 - t0;
    assoc.time_associate_s = t2 - t1;
    if (stats) {
      stats->kernel_count = assoc.kernel_count;
      stats->primitive_count = assoc.primitive_count;
      stats->homogenized_count = assoc.homogenized_count;
    }
    if (timings) {
      timings->extract_s += assoc.time_extract_s;
      timings->associate_s += assoc.time_associate_s;
    }
    return assoc;
  };
}

CalibrationReport calibrate_from(const MotorStampedCloud& cloud,
                                 const MotorTrajectory& traj, const RunConfig& config,
                                 const ExtrinsicParams& ext_init) {
  CalibrationReport report;
  report.config = config;
  report.cloud_points = cloud.size();

  const double t0 = now_s();
  const AssociationProvider provider = make_association_provider(
      cloud, config, &report.stats, &report.timings);
  report.result = solve(provider, ext_init, traj, config.solver_config());
  report.timings.total_s = now_s() - t0;
  report.timings.solve_s =
      report.timings.total_s - report.timings.extract_s - report.timings.associate_s;
  return report;
}

CalibrationReport calibrate(const MotorStampedCloud& cloud, const MotorTrajectory& traj,
                            const RunConfig& config) {
  ExtrinsicParams init;
  init.yaw_fixed = config.yaw_fixed;
  init.tz_fixed = config.tz_fixed;
  return calibrate_from(cloud, traj, config, init);
}

void write_report(const CalibrationReport& report, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InputError("cannot write report: " + path);
  const SolveResult& r = report.result;
  std::fprintf(out, "# calibration report\n");
  std::fprintf(out, "status: %s\n", r.converged ? "converged" : "not_converged");
  std::fprintf(out, "mode: %s\n", to_string(report.config.mode).c_str());
  std::fprintf(out, "roll_rad: %.17g\n", r.ext.roll);
  std::fprintf(out, "pitch_rad: %.17g\n", r.ext.pitch);
  std::fprintf(out, "tx_m: %.17g\n", r.ext.tx);
  std::fprintf(out, "ty_m: %.17g\n", r.ext.ty);
  std::fprintf(out, "yaw_rad: %.17g\n", r.ext.yaw_fixed);
  std::fprintf(out, "tz_m: %.17g\n", r.ext.tz_fixed);
  std::fprintf(out, "time_offset_s: %.17g\n", r.time_offset);
  std::fprintf(out, "final_cost: %.17g\n", r.final_cost);
  std::fprintf(out, "rms_residual_m: %.17g\n", r.stats.rms);
  std::fprintf(out, "median_abs_residual_m: %.17g\n", r.stats.median_abs);
  std::fprintf(out, "inlier_fraction: %.17g\n", r.stats.inlier_fraction);
  std::fprintf(out, "outer_iterations: %d\n", r.outer_iterations);
  std::fprintf(out, "residual_evaluations: %zu\n", r.residual_evaluations);
  std::fprintf(out, "correspondences: %zu\n", r.correspondence_count);
  std::fprintf(out, "cloud_points: %zu\n", report.cloud_points);
  std::fprintf(out, "kernels: %zu\n", report.stats.kernel_count);
  std::fprintf(out, "primitives_filtered: %zu\n", report.stats.primitive_count);
  std::fprintf(out, "primitives_used: %zu\n", report.stats.homogenized_count);
  std::fprintf(out, "time_extract_s: %.6f\n", report.timings.extract_s);
  std::fprintf(out, "time_associate_s: %.6f\n", report.timings.associate_s);
  std::fprintf(out, "time_solve_s: %.6f\n", report.timings.solve_s);
  std::fprintf(out, "time_total_s: %.6f\n", report.timings.total_s);
  if (!report.cloud_path.empty()) {
    std::fprintf(out, "cloud_file: %s\n", report.cloud_path.c_str());
  }
  if (!report.traj_path.empty()) {
    std::fprintf(out, "trajectory_file: %s\n", report.traj_path.c_str());
  }
  for (const auto& [key, value] : config_entries(report.config)) {
    std::fprintf(out, "config.%s: %s\n", key.c_str(), value.c_str());
  }
  std::fclose(out);
}

void write_cost_trace_csv(const SolveResult& result, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InputError("cannot write cost trace: " + path);
  std::fputs("outer,inner,cost\n", out);
  for (const auto& rec : result.cost_trace) {
    std::fprintf(out, "%d,%d,%.17g\n", rec.outer, rec.inner, rec.cost);
  }
  std::fclose(out);
}

void write_param_trace_csv(const SolveResult& result, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InputError("cannot write parameter trace: " + path);
  std::fputs("outer,roll_rad,pitch_rad,tx_m,ty_m,time_offset_s,correspondences\n", out);
  for (const auto& rec : result.param_trace) {
    std::fprintf(out, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%zu\n", rec.outer, rec.roll,
                 rec.pitch, rec.tx, rec.ty, rec.time_offset, rec.correspondences);
  }
  std::fclose(out);
}

ExtrinsicParams read_extrinsics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open extrinsics file: " + path);
  ExtrinsicParams ext;
  bool have_roll = false, have_pitch = false, have_tx = false, have_ty = false;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream iss(line);
    std::string key;
    double value;
    if (!(iss >> key >> value)) continue;
    if (key == "roll_rad:") { ext.roll = value; have_roll = true; }
    else if (key == "pitch_rad:") { ext.pitch = value; have_pitch = true; }
    else if (key == "tx_m:") { ext.tx = value; have_tx = true; }
    else if (key == "ty_m:") { ext.ty = value; have_ty = true; }
    else if (key == "yaw_rad:") ext.yaw_fixed = value;
    else if (key == "tz_m:") ext.tz_fixed = value;
  }
  if (!(have_roll && have_pitch && have_tx && have_ty)) {
    throw InputError("missing roll_rad/pitch_rad/tx_m/ty_m keys in: " + path);
  }
  return ext;
}

void write_extrinsics_sidecar(const ExtrinsicParams& ext, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InputError("cannot write extrinsics sidecar: " + path);
  std::fprintf(out, "# ground-truth extrinsics\n");
  std::fprintf(out, "roll_rad: %.17g\n", ext.roll);
  std::fprintf(out, "pitch_rad: %.17g\n", ext.pitch);
  std::fprintf(out, "tx_m: %.17g\n", ext.tx);
  std::fprintf(out, "ty_m: %.17g\n", ext.ty);
  std::fprintf(out, "yaw_rad: %.17g\n", ext.yaw_fixed);
  std::fprintf(out, "tz_m: %.17g\n", ext.tz_fixed);
  std::fclose(out);
}

}  // namespace motocal
