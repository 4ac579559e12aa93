#include "motocal/commands.hpp"

#include "motocal/cloud_io.hpp"

namespace motocal {

MotorStampedCloud load_stamped_cloud(const std::string& cloud_path,
                                     const MotorTrajectory& traj,
                                     const RunConfig& config) {
  const auto records = read_cloud(cloud_path, cloud_format_from_path(cloud_path),
                                  config.range_validation_config());
  StampResult stamped = stamp_cloud(records, traj);
  stamped.cloud.source_id = cloud_path;
  return std::move(stamped.cloud);
}

SynthSummary cmd_synth(const SynthArgs& args) {
  if (args.out_cloud.empty() || args.out_traj.empty()) {
    throw InputError("synth requires output paths for the cloud and the trajectory");
  }
  SceneModel scene;
  if (args.scene_kind == "room") {
    scene = make_room_scene(args.room_width, args.room_depth, args.room_height);
  } else if (args.scene_kind == "sparse") {
    scene = make_sparse_scene(args.sparse_planes, args.sparse_clutter, args.seed);
  } else if (args.scene_kind == "file") {
    scene = read_scene(args.scene_path);
  } else {
    throw InputError("unknown scene kind '" + args.scene_kind +
                     "' (want room, sparse, or file)");
  }

  const MotorTrajectory traj = make_constant_rate_trajectory(
      args.duration_s, args.revolutions, args.encoder_rate_hz);
  const SimulatedScan scan =
      simulate_scan(scene, args.sensor, traj, args.ext_true, args.seed);

  write_cloud(to_records(scan.cloud), args.out_cloud,
              cloud_format_from_path(args.out_cloud));
  write_trajectory(traj, args.out_traj);
  if (!args.out_truth.empty()) write_extrinsics_sidecar(args.ext_true, args.out_truth);
  if (!args.out_regions.empty()) {
    write_regions(regions_from_scene(scene), args.out_regions);
  }
  if (!args.out_scene.empty()) write_scene(scene, args.out_scene);

  return {scan.cloud.size(), scene.planes.size(), scene.spheres.size()};
}

CalibrationReport cmd_calibrate(const CalibrateArgs& args) {
  args.config.validate();
  const MotorTrajectory traj = read_trajectory(args.traj_path);
  const MotorStampedCloud cloud = load_stamped_cloud(args.cloud_path, traj, args.config);

  CalibrationReport report = calibrate(cloud, traj, args.config);
  report.cloud_path = args.cloud_path;
  report.traj_path = args.traj_path;

  if (!args.out_prefix.empty()) {
    write_report(report, args.out_prefix + ".report.txt");
    write_cost_trace_csv(report.result, args.out_prefix + ".cost_trace.csv");
    write_param_trace_csv(report.result, args.out_prefix + ".param_trace.csv");
  }
  return report;
}

EvaluateSummary cmd_evaluate(const EvaluateArgs& args) {
  args.config.validate();
  const MotorTrajectory traj = read_trajectory(args.traj_path);
  const MotorStampedCloud cloud = load_stamped_cloud(args.cloud_path, traj, args.config);

  const auto resolve = [&](const std::string& spec) {
    if (spec == "identity") {
      ExtrinsicParams ext;
      ext.yaw_fixed = args.config.yaw_fixed;
      ext.tz_fixed = args.config.tz_fixed;
      return ext;
    }
    return read_extrinsics(spec);
  };

  std::vector<Region> regions;
  if (!args.regions_path.empty()) regions = read_regions(args.regions_path);

  EvaluateSummary summary;
  summary.report_a = evaluate_plane_fit(cloud, resolve(args.extrinsics_a), regions);
  if (!args.out_prefix.empty()) {
    write_plane_fit_csv(summary.report_a, args.out_prefix + ".plane_fit.csv");
  }
  if (!args.extrinsics_b.empty()) {
    summary.report_b = evaluate_plane_fit(cloud, resolve(args.extrinsics_b), regions);
    if (!args.out_prefix.empty()) {
      write_comparison_csv(summary.report_a, "a", *summary.report_b, "b",
                           args.out_prefix + ".compare.csv");
    }
  }
  return summary;
}

SweepGrid cmd_sweep(const SweepArgs& args) {
  args.config.validate();
  if (args.out_csv.empty()) throw InputError("sweep requires an output CSV path");
  const MotorTrajectory traj = read_trajectory(args.traj_path);
  const MotorStampedCloud cloud = load_stamped_cloud(args.cloud_path, traj, args.config);
  std::vector<Region> regions;
  if (!args.regions_path.empty()) regions = read_regions(args.regions_path);

  const SweepGrid grid = parameter_sweep(cloud, traj, regions, args.config, args.spec);
  write_sweep_csv(grid, args.out_csv);
  return grid;
}

}  // namespace motocal
