#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "motocal/cloud_io.hpp"
#include "motocal/correspondences.hpp"
#include "motocal/primitives.hpp"
#include "motocal/solver.hpp"

namespace motocal {

enum class CalibMode { kLimo, kVanilla };

std::string to_string(CalibMode mode);
CalibMode mode_from_string(const std::string& s);

// Every tunable of the pipeline, with defaults. Loaded from a flat
// `key value` text file; unknown keys are hard errors (silent typos
// corrupt experiments). CLI flags override file values.
struct RunConfig {
  CalibMode mode = CalibMode::kLimo;

  // primitive extraction
  double voxel_size = 1.0;      // m
  double planarity_min = 0.5;
  double cond_max = 100.0;      // "inf" disables the gate
  double gamma = 0.01;
  int k_max = 50;
  int min_voxel_support = 10;
  double bin_width_deg = 10.0;

  // association
  double delta_theta_min_deg = 30.0;
  double r_corr = 0.3;  // m
  int pairs_per_primitive = 1;

  // solver
  double huber_delta = 0.05;  // m
  double relative_cost_tolerance = 1e-6;
  int max_inner_iterations = 50;
  int max_outer_iterations = 5;
  double outer_tol_rotation = 1e-6;     // rad
  double outer_tol_translation = 1e-5;  // m
  double lm_lambda_init = 1e-4;
  double lm_lambda_up = 10.0;
  double lm_lambda_down = 0.5;
  std::string rotation_jacobian_form = "exact";  // or "near_identity"
  bool optimize_time_offset = false;
  double time_offset = 0.0;  // s

  // frame constants (unobservable, fixed by convention)
  double yaw_fixed = 0.0;  // rad
  double tz_fixed = 0.0;   // m

  // input validation
  bool range_validation = false;
  double range_min = 0.1;   // m
  double range_max = 40.0;  // m

  std::uint64_t seed = 0;
  int workers = 0;  // 0 = hardware concurrency

  void validate() const;

  SolverConfig solver_config() const;
  ExtractionConfig extraction_config() const;
  AssociationConfig association_config() const;
  RangeValidation range_validation_config() const;
};

// Applies one `key value` pair; throws InputError on unknown key or bad value.
void set_config_value(RunConfig& config, const std::string& key,
                      const std::string& value);

RunConfig load_config(const std::string& path);

// Full echo as `key value` lines; load(echo(c)) == c.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);

}  // namespace motocal
