#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "motocal/evaluation.hpp"
#include "motocal/synth.hpp"

namespace motocal {

// Library-level command implementations behind the CLI subcommands, so the
// whole surface is testable in-process.

struct SynthArgs {
  std::string scene_kind = "room";  // room | sparse | file
  double room_width = 10.0;         // m
  double room_depth = 8.0;
  double room_height = 3.0;
  int sparse_planes = 6;
  int sparse_clutter = 0;
  std::string scene_path;  // input scene file when scene_kind == "file"

  double duration_s = 10.0;
  double revolutions = 1.0;
  double encoder_rate_hz = 100.0;
  SensorSpec sensor;
  ExtrinsicParams ext_true;
  std::uint64_t seed = 1;

  std::string out_cloud;    // required; .csv or .lmc
  std::string out_traj;     // required
  std::string out_truth;    // optional ground-truth sidecar
  std::string out_regions;  // optional per-patch evaluation regions
  std::string out_scene;    // optional scene echo
};

struct SynthSummary {
  std::size_t points = 0;
  std::size_t planes = 0;
  std::size_t spheres = 0;
};

SynthSummary cmd_synth(const SynthArgs& args);

struct CalibrateArgs {
  std::string cloud_path;
  std::string traj_path;
  RunConfig config;
  std::string out_prefix;  // writes <prefix>.report.txt + two trace CSVs
};

CalibrationReport cmd_calibrate(const CalibrateArgs& args);

struct EvaluateArgs {
  std::string cloud_path;
  std::string traj_path;
  std::string extrinsics_a;  // report/sidecar path, or "identity"
  std::string extrinsics_b;  // optional second set for a comparison table
  std::string regions_path;  // optional; empty = aggregate-only
  RunConfig config;
  std::string out_prefix;  // writes <prefix>.plane_fit.csv (+ .compare.csv)
};

struct EvaluateSummary {
  PlaneFitReport report_a;
  std::optional<PlaneFitReport> report_b;
};

EvaluateSummary cmd_evaluate(const EvaluateArgs& args);

struct SweepArgs {
  std::string cloud_path;
  std::string traj_path;
  std::string regions_path;  // optional
  RunConfig config;
  SweepSpec spec;
  std::string out_csv;
};

SweepGrid cmd_sweep(const SweepArgs& args);

// Shared input loading: read + stamp, honoring the config's range validation.
MotorStampedCloud load_stamped_cloud(const std::string& cloud_path,
                                     const MotorTrajectory& traj,
                                     const RunConfig& config);

}  // namespace motocal
