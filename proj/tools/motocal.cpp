// motocal: target-free LiDAR-motor extrinsic calibration toolkit.
//
// Subcommands: synth | calibrate | evaluate | sweep. Exit codes:
// 0 success, 1 internal error, 2 input error, 3 degenerate geometry,
// 4 calibration did not converge.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "motocal/commands.hpp"

namespace {

using namespace motocal;

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InputError("bad " + what + ": '" + text + "'");
  }
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find(',', pos);
    const std::string field =
        text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    out.push_back(parse_number(field, what));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

struct CommonConfigFlags {
  std::string config_path;
  std::string mode;
  std::string seed;
  int workers = -1;  // -1 = not provided
  std::vector<std::string> sets;  // key=value overrides

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Config file (flat `key value` lines)");
    cmd->add_option("--mode", mode, "limo | vanilla");
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--workers", workers, "Worker threads (0 = hardware)");
    cmd->add_option("--set", sets, "Override any config key as key=value")
        ->take_all();
  }

  RunConfig resolve() const {
    RunConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    for (const auto& kv : sets) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos) {
        throw InputError("--set expects key=value, got '" + kv + "'");
      }
      set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!mode.empty()) config.mode = mode_from_string(mode);
    if (!seed.empty()) set_config_value(config, "seed", seed);
    if (workers >= 0) config.workers = workers;
    config.validate();
    return config;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Target-free LiDAR-motor extrinsic calibration"};
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Generate a synthetic motorized scan");
  SynthArgs synth_args;
  double roll_deg = 0.0, pitch_deg = 0.0;
  std::string synth_seed;
  synth->add_option("--scene", synth_args.scene_kind, "room | sparse | file");
  synth->add_option("--scene-file", synth_args.scene_path, "Scene file for --scene file");
  synth->add_option("--width", synth_args.room_width, "Room width, m");
  synth->add_option("--depth", synth_args.room_depth, "Room depth, m");
  synth->add_option("--height", synth_args.room_height, "Room height, m");
  synth->add_option("--planes", synth_args.sparse_planes, "Sparse scene plane count");
  synth->add_option("--clutter", synth_args.sparse_clutter, "Sparse scene sphere count");
  synth->add_option("--duration", synth_args.duration_s, "Scan duration, s");
  synth->add_option("--revolutions", synth_args.revolutions, "Motor revolutions");
  synth->add_option("--encoder-rate", synth_args.encoder_rate_hz, "Encoder rate, Hz");
  synth->add_option("--rays", synth_args.sensor.rays_per_sweep, "Azimuth steps per sweep");
  synth->add_option("--elev-lines", synth_args.sensor.elevation_lines, "Elevation lines");
  synth->add_option("--sweep-rate", synth_args.sensor.sweep_rate_hz, "Sweeps per second");
  synth->add_option("--noise-sigma", synth_args.sensor.range_sigma, "Range noise sigma, m");
  synth->add_option("--roll-deg", roll_deg, "True roll, degrees");
  synth->add_option("--pitch-deg", pitch_deg, "True pitch, degrees");
  synth->add_option("--tx", synth_args.ext_true.tx, "True tx, m");
  synth->add_option("--ty", synth_args.ext_true.ty, "True ty, m");
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_option("--out-cloud", synth_args.out_cloud, "Cloud output (.csv | .lmc)")
      ->required();
  synth->add_option("--out-traj", synth_args.out_traj, "Encoder log output")->required();
  synth->add_option("--out-truth", synth_args.out_truth, "Ground-truth sidecar output");
  synth->add_option("--out-regions", synth_args.out_regions, "Evaluation regions output");
  synth->add_option("--out-scene", synth_args.out_scene, "Scene echo output");

  // ---- calibrate ----
  auto* calibrate = app.add_subcommand("calibrate", "Recover the 4-DOF extrinsics");
  CalibrateArgs calib_args;
  CommonConfigFlags calib_flags;
  calibrate->add_option("--cloud", calib_args.cloud_path, "Input cloud")->required();
  calibrate->add_option("--traj", calib_args.traj_path, "Encoder log")->required();
  calibrate->add_option("--out", calib_args.out_prefix, "Output prefix")->required();
  calib_flags.add_to(calibrate);

  // ---- evaluate ----
  auto* evaluate = app.add_subcommand("evaluate", "Plane-fitting-error evaluation");
  EvaluateArgs eval_args;
  CommonConfigFlags eval_flags;
  evaluate->add_option("--cloud", eval_args.cloud_path, "Input cloud")->required();
  evaluate->add_option("--traj", eval_args.traj_path, "Encoder log")->required();
  evaluate->add_option("--ext", eval_args.extrinsics_a,
                       "Report/sidecar path or 'identity'")->required();
  evaluate->add_option("--ext-b", eval_args.extrinsics_b,
                       "Second extrinsics for a comparison table");
  evaluate->add_option("--regions", eval_args.regions_path, "Regions file");
  evaluate->add_option("--out", eval_args.out_prefix, "Output prefix")->required();
  eval_flags.add_to(evaluate);

  // ---- sweep ----
  auto* sweep = app.add_subcommand("sweep", "Voxel-size / planarity-threshold sweep");
  SweepArgs sweep_args;
  CommonConfigFlags sweep_flags;
  std::string voxel_list = "1.0", planarity_list = "0.5";
  sweep->add_option("--cloud", sweep_args.cloud_path, "Input cloud")->required();
  sweep->add_option("--traj", sweep_args.traj_path, "Encoder log")->required();
  sweep->add_option("--regions", sweep_args.regions_path, "Regions file");
  sweep->add_option("--voxel-sizes", voxel_list, "Comma-separated voxel sizes, m");
  sweep->add_option("--planarity", planarity_list, "Comma-separated thresholds");
  sweep->add_option("--out", sweep_args.out_csv, "Output CSV")->required();
  sweep_flags.add_to(sweep);

  CLI11_PARSE(app, argc, argv);

  if (*synth) {
    synth_args.ext_true.roll = roll_deg * M_PI / 180.0;
    synth_args.ext_true.pitch = pitch_deg * M_PI / 180.0;
    if (!synth_seed.empty()) {
      synth_args.seed = static_cast<std::uint64_t>(
          parse_number(synth_seed, "seed"));
    }
    const SynthSummary summary = cmd_synth(synth_args);
    std::printf("synth: %zu points from %zu planes, %zu spheres -> %s\n",
                summary.points, summary.planes, summary.spheres,
                synth_args.out_cloud.c_str());
    return kExitOk;
  }
  if (*calibrate) {
    calib_args.config = calib_flags.resolve();
    const CalibrationReport report = cmd_calibrate(calib_args);
    const SolveResult& r = report.result;
    std::printf("calibrate [%s]: %s\n", to_string(report.config.mode).c_str(),
                r.converged ? "converged" : "NOT CONVERGED");
    std::printf("  roll  %+.6f deg\n  pitch %+.6f deg\n  tx    %+.6f m\n"
                "  ty    %+.6f m\n",
                r.ext.roll * 180.0 / M_PI, r.ext.pitch * 180.0 / M_PI, r.ext.tx,
                r.ext.ty);
    std::printf("  rms residual %.3e m over %zu correspondences, %.2f s total\n",
                r.stats.rms, r.correspondence_count, report.timings.total_s);
    return r.converged ? kExitOk : kExitNotConverged;
  }
  if (*evaluate) {
    eval_args.config = eval_flags.resolve();
    const EvaluateSummary summary = cmd_evaluate(eval_args);
    std::printf("evaluate: aggregate mse %.6e m^2 over %zu points\n",
                summary.report_a.aggregate_mse, summary.report_a.total_points);
    if (summary.report_b) {
      std::printf("          second set %.6e m^2\n", summary.report_b->aggregate_mse);
    }
    return kExitOk;
  }
  if (*sweep) {
    sweep_args.config = sweep_flags.resolve();
    sweep_args.spec.voxel_sizes = parse_list(voxel_list, "voxel size");
    sweep_args.spec.planarity_thresholds = parse_list(planarity_list, "planarity");
    const SweepGrid grid = cmd_sweep(sweep_args);
    std::size_t ok = 0;
    for (const auto& c : grid.cells) ok += c.ok ? 1 : 0;
    std::printf("sweep: %zu/%zu cells ok -> %s\n", ok, grid.cells.size(),
                sweep_args.out_csv.c_str());
    return kExitOk;
  }
  return kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const motocal::InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return motocal::kExitInputError;
  } catch (const motocal::DegenerateGeometryError& e) {
    std::fprintf(stderr, "degenerate geometry: %s\n", e.what());
    return motocal::kExitDegenerateGeometry;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return motocal::kExitInternal;
  }
}
