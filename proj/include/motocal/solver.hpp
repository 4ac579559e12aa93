#pragma once

#include <functional>
#include <vector>

#include "motocal/correspondences.hpp"

namespace motocal {

// The paper-style rotation Jacobian omits R_L^M inside the skew term,
// which is only exact when the mounting rotation is near identity. The
// exact form differentiates a left-multiplicative perturbation in the
// motor frame (validated against finite differences).
enum class RotationJacobianForm { kExact, kNearIdentity };

struct SolverConfig {
  double huber_delta = 0.05;  // m; +inf degrades to plain least squares
  int max_inner_iterations = 50;
  int max_outer_iterations = 5;
  double relative_cost_tolerance = 1e-6;
  double outer_tol_rotation = 1e-6;     // rad
  double outer_tol_translation = 1e-5;  // m
  double lm_initial_lambda = 1e-4;
  double lm_lambda_up = 10.0;
  double lm_lambda_down = 0.5;
  int workers = 0;
  RotationJacobianForm rotation_jacobian_form = RotationJacobianForm::kExact;
  bool optimize_time_offset = false;  // auxiliary encoder-LiDAR offset
  double time_offset = 0.0;           // s, frozen unless optimized
};

struct CostRecord {
  int outer = 0;
  int inner = 0;  // 0 = cost before the first step of this outer iteration
  double cost = 0.0;
};

struct OuterRecord {
  int outer = 0;
  double roll = 0.0;
  double pitch = 0.0;
  double tx = 0.0;
  double ty = 0.0;
  double time_offset = 0.0;
  std::size_t correspondences = 0;
};

struct ResidualStats {
  double rms = 0.0;
  double median_abs = 0.0;
  double inlier_fraction = 0.0;  // |r| <= huber_delta
};

struct SolveResult {
  ExtrinsicParams ext;
  double time_offset = 0.0;
  double final_cost = 0.0;
  std::vector<CostRecord> cost_trace;    // non-increasing within an inner solve
  std::vector<OuterRecord> param_trace;  // one row per outer iteration
  bool converged = false;
  int outer_iterations = 0;
  ResidualStats stats;
  std::size_t residual_evaluations = 0;  // scalar residual computations
  std::size_t correspondence_count = 0;  // final association
};

// Rebuilds the data association under the current estimate once per outer
// iteration. The counters feed reports and the timing breakdown.
struct Association {
  std::vector<Correspondence> correspondences;
  std::size_t kernel_count = 0;
  std::size_t primitive_count = 0;    // after planarity/condition filtering
  std::size_t homogenized_count = 0;  // primitives actually used
  double time_extract_s = 0.0;
  double time_associate_s = 0.0;
};
using AssociationProvider = std::function<Association(const ExtrinsicParams&)>;

// d residual / d r_L^M: n^T (R_M^B(t_m) - R_M^B(t_n)). The solver consumes
// only x and y; the z entry vanishes identically for a z-axis motor.
Eigen::RowVector3d jacobian_translation(const Correspondence& c,
                                        const MotorTrajectory& traj,
                                        double time_offset = 0.0);

// d residual / d so(3) perturbation of R_L^M. kExact uses the
// left-multiplicative convention delta: R <- exp([delta]x) R, giving
//   n^T ( -R_M^B(t_m) [R_L^M p_m]x + R_M^B(t_n) [R_L^M p_n]x ).
// kNearIdentity drops R_L^M inside the skews. The solver consumes x
// (roll) and y (pitch); z is the unobservable yaw direction.
Eigen::RowVector3d jacobian_rotation(const Correspondence& c,
                                     const ExtrinsicParams& ext,
                                     const MotorTrajectory& traj,
                                     RotationJacobianForm form = RotationJacobianForm::kExact,
                                     double time_offset = 0.0);

// Huber loss and its IRLS weight; delta = +inf reduces both to plain
// squared loss exactly.
double huber_rho(double r, double delta);
double huber_weight(double r, double delta);

// Robust weighted nonlinear least squares over (roll, pitch, tx, ty):
// outer re-association loop around a Levenberg-Marquardt inner solve on
// damped 4x4 (or 5x5 with the time offset) normal equations. Throws
// DegenerateGeometryError when the geometry constrains fewer than 4 DOF.
SolveResult solve(const AssociationProvider& provider, const ExtrinsicParams& ext_init,
                  const MotorTrajectory& traj, const SolverConfig& config);

}  // namespace motocal
