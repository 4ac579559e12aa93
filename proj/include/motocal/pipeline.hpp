#pragma once

#include <string>

#include "motocal/config.hpp"

namespace motocal {

struct StageTimings {
  double extract_s = 0.0;    // transform + kernels + fit + homogenize
  double associate_s = 0.0;  // partner search
  double solve_s = 0.0;      // LM iterations
  double total_s = 0.0;
};

struct PipelineStats {
  std::size_t kernel_count = 0;       // last outer iteration
  std::size_t primitive_count = 0;    // after filtering
  std::size_t homogenized_count = 0;  // primitives used for association
};

struct CalibrationReport {
  SolveResult result;
  RunConfig config;  // fully resolved, echoed into every report
  StageTimings timings;
  PipelineStats stats;
  std::size_t cloud_points = 0;
  std::string cloud_path;
  std::string traj_path;
};

// Re-association callback for the solver's outer loop: transforms the
// cloud under the current estimate (using the per-point motor angles),
// rebuilds the spatial index, extracts and (in limo mode) homogenizes
// primitives, then pairs them across motor angles. stats/timings may be
// null. The cloud must outlive the provider.
AssociationProvider make_association_provider(const MotorStampedCloud& cloud,
                                              const RunConfig& config,
                                              PipelineStats* stats = nullptr,
                                              StageTimings* timings = nullptr);

// Full calibration with the mode taken from config (limo or vanilla),
// starting from (roll, pitch, tx, ty) = 0 with the configured fixed yaw/tz.
CalibrationReport calibrate(const MotorStampedCloud& cloud, const MotorTrajectory& traj,
                            const RunConfig& config);

CalibrationReport calibrate_from(const MotorStampedCloud& cloud,
                                 const MotorTrajectory& traj, const RunConfig& config,
                                 const ExtrinsicParams& ext_init);

// Structured text report ("key: value" lines plus a config echo) and the
// CSV traces. Traces carry no timing, so re-runs are byte-identical.
void write_report(const CalibrationReport& report, const std::string& path);
void write_cost_trace_csv(const SolveResult& result, const std::string& path);
void write_param_trace_csv(const SolveResult& result, const std::string& path);

// Reads roll_rad/pitch_rad/tx_m/ty_m (+ optional yaw_rad/tz_m) from a
// calibration report or a ground-truth sidecar; both use the same keys.
ExtrinsicParams read_extrinsics(const std::string& path);

void write_extrinsics_sidecar(const ExtrinsicParams& ext, const std::string& path);

}  // namespace motocal
