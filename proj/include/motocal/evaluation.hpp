#pragma once

#include <string>
#include <vector>

#include "motocal/pipeline.hpp"
#include "motocal/scene.hpp"

namespace motocal {

// Mean squared orthogonal distance (m^2) of the points to their unweighted
// best-fit plane. Throws DegenerateGeometryError on <3 or collinear points.
double plane_fitting_error(const std::vector<Vec3>& points);

// Axis-aligned evaluation region in the base frame.
struct Region {
  std::string name;
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

// Text format: `name lo_x lo_y lo_z hi_x hi_y hi_z` per line.
std::vector<Region> read_regions(const std::string& path);
void write_regions(const std::vector<Region>& regions, const std::string& path);

// Thin boxes around each scene patch (programmatic region selection on
// synthetic data; manual selection is irreproducible in CI).
std::vector<Region> regions_from_scene(const SceneModel& scene, double margin = 0.08);

struct RegionError {
  std::string name;
  std::size_t point_count = 0;
  double mse = 0.0;        // m^2
  bool degenerate = false; // <3 points or collinear; excluded from aggregate
};

struct PlaneFitReport {
  std::vector<RegionError> regions;
  double aggregate_mse = 0.0;       // point-weighted mean over valid regions
  std::size_t total_points = 0;     // points in valid regions
};

// Transforms the cloud with `ext` and scores each region. With no regions
// the whole cloud forms a single region "all" (aggregate-only report).
PlaneFitReport evaluate_plane_fit(const MotorStampedCloud& cloud,
                                  const ExtrinsicParams& ext,
                                  const std::vector<Region>& regions);

void write_plane_fit_csv(const PlaneFitReport& report, const std::string& path);

// Table-I-style side-by-side of two calibrations on the same regions.
void write_comparison_csv(const PlaneFitReport& a, const std::string& label_a,
                          const PlaneFitReport& b, const std::string& label_b,
                          const std::string& path);

struct StabilityBatch {
  std::size_t batch = 0;
  ExtrinsicParams ext;
  bool converged = false;
};

struct StabilityReport {
  std::vector<StabilityBatch> batches;  // non-converged batches stay listed
  double mean_roll = 0, std_roll = 0;
  double mean_pitch = 0, std_pitch = 0;
  double mean_tx = 0, std_tx = 0;
  double mean_ty = 0, std_ty = 0;
};

// Calibrates every batch against the shared trajectory and reports the
// per-parameter dispersion (sample standard deviation).
StabilityReport stability_analysis(const std::vector<MotorStampedCloud>& batches,
                                   const MotorTrajectory& traj,
                                   const RunConfig& config);

void write_stability_csv(const StabilityReport& limo, const StabilityReport& vanilla,
                         const std::string& path);

struct SweepSpec {
  std::vector<double> voxel_sizes;           // m
  std::vector<double> planarity_thresholds;
};

struct SweepCell {
  double voxel_size = 0.0;
  double planarity_min = 0.0;
  bool ok = false;
  std::string error;     // error class when !ok
  double mse = 0.0;      // plane-fitting error after calibration, m^2
  double runtime_s = 0.0;
  ExtrinsicParams ext;
};

struct SweepGrid {
  std::vector<SweepCell> cells;  // row-major: voxel outer, planarity inner
};

// Full grid of (error, runtime); per-cell failures are recorded in-grid,
// never dropped. Cells run sequentially so runtimes stay comparable.
SweepGrid parameter_sweep(const MotorStampedCloud& cloud, const MotorTrajectory& traj,
                          const std::vector<Region>& regions,
                          const RunConfig& base_config, const SweepSpec& spec);

void write_sweep_csv(const SweepGrid& grid, const std::string& path);

}  // namespace motocal
