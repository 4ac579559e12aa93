#include "motocal/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "motocal/parallel.hpp"

namespace motocal {

namespace {

constexpr double kTimeOffsetFdStep = 1e-5;  // s, for the auxiliary column
constexpr double kLambdaMax = 1e12;
constexpr double kLambdaMin = 1e-12;
constexpr double kRankRelTol = 1e-10;

Mat3 exp_so3(const Vec3& v) {
  const double angle = v.norm();
  if (angle < 1e-14) return Mat3::Identity() + skew(v);
  return Eigen::AngleAxisd(angle, v / angle).toRotationMatrix();
}

struct State {
  ExtrinsicParams ext;
  double tau = 0.0;
};

// Left-multiplicative rotation step in the motor frame with the yaw
// component projected out, then re-extraction of (roll, pitch) in the
// fixed Euler convention.
State apply_step(const State& x, const Eigen::VectorXd& delta) {
  State out = x;
  const Mat3 r_new = exp_so3({delta[0], delta[1], 0.0}) * x.ext.rotation();
  double roll, pitch, yaw;
  euler_from_rotation(r_new, roll, pitch, yaw);
  out.ext.roll = roll;
  out.ext.pitch = pitch;  // yaw_fixed untouched: projection
  out.ext.tx += delta[2];
  out.ext.ty += delta[3];
  if (delta.size() > 4) out.tau += delta[4];
  return out;
}

struct Assembly {
  Eigen::MatrixXd h;
  Eigen::VectorXd g;
  double cost = 0.0;
  std::vector<double> residuals;
};

Eigen::RowVector3d jac_rotation_cached(const Correspondence& c, const Mat3& r_lm,
                                       const MotorTrajectory& traj,
                                       RotationJacobianForm form, double tau) {
  const Mat3 r_m = rot_z(traj.angle_at_clamped(c.t_m + tau));
  const Mat3 r_n = rot_z(traj.angle_at_clamped(c.t_n + tau));
  const Vec3 a_m = form == RotationJacobianForm::kExact ? Vec3(r_lm * c.point_m)
                                                        : c.point_m;
  const Vec3 a_n = form == RotationJacobianForm::kExact ? Vec3(r_lm * c.point_n)
                                                        : c.point_n;
  return c.normal.transpose() * (r_n * skew(a_n) - r_m * skew(a_m));
}

Eigen::RowVector3d jac_translation_cached(const Correspondence& c,
                                          const MotorTrajectory& traj, double tau) {
  const Mat3 r_m = rot_z(traj.angle_at_clamped(c.t_m + tau));
  const Mat3 r_n = rot_z(traj.angle_at_clamped(c.t_n + tau));
  return c.normal.transpose() * (r_m - r_n);
}

// Residuals + robustified normal equations, reduced over fixed chunks in
// chunk order for bit-identical results at any worker count.
Assembly assemble(const std::vector<Correspondence>& corrs, const State& x,
                  const MotorTrajectory& traj, const SolverConfig& config,
                  std::size_t& eval_counter) {
  const int dim = config.optimize_time_offset ? 5 : 4;
  const Mat3 r_lm = x.ext.rotation();
  const Vec3 t_lm = x.ext.translation();

  constexpr std::size_t kChunk = 256;
  const std::size_t nchunks = num_chunks(corrs.size(), kChunk);
  std::vector<Eigen::MatrixXd> hs(nchunks, Eigen::MatrixXd::Zero(dim, dim));
  std::vector<Eigen::VectorXd> gs(nchunks, Eigen::VectorXd::Zero(dim));
  std::vector<double> costs(nchunks, 0.0);

  Assembly a;
  a.residuals.resize(corrs.size());

  parallel_chunks(corrs.size(), config.workers, kChunk,
                  [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Eigen::VectorXd row(dim);
    for (std::size_t i = begin; i < end; ++i) {
      const Correspondence& c = corrs[i];
      const double r = residual_cached(c, r_lm, t_lm, traj, x.tau);
      a.residuals[i] = r;
      const Eigen::RowVector3d j_rot =
          jac_rotation_cached(c, r_lm, traj, config.rotation_jacobian_form, x.tau);
      const Eigen::RowVector3d j_tr = jac_translation_cached(c, traj, x.tau);
      row[0] = j_rot[0];
      row[1] = j_rot[1];
      row[2] = j_tr[0];
      row[3] = j_tr[1];
      if (dim == 5) {
        row[4] = (residual_cached(c, r_lm, t_lm, traj, x.tau + kTimeOffsetFdStep) -
                  residual_cached(c, r_lm, t_lm, traj, x.tau - kTimeOffsetFdStep)) /
                 (2.0 * kTimeOffsetFdStep);
      }
      const double w = c.weight * huber_weight(r, config.huber_delta);
      hs[chunk].noalias() += w * (row * row.transpose());
      gs[chunk].noalias() += (w * r) * row;
      costs[chunk] += c.weight * huber_rho(r, config.huber_delta);
    }
  });

  a.h = Eigen::MatrixXd::Zero(dim, dim);
  a.g = Eigen::VectorXd::Zero(dim);
  for (std::size_t chunk = 0; chunk < nchunks; ++chunk) {
    a.h += hs[chunk];
    a.g += gs[chunk];
    a.cost += costs[chunk];
  }
  eval_counter += corrs.size();
  return a;
}

double evaluate_cost(const std::vector<Correspondence>& corrs, const State& x,
                     const MotorTrajectory& traj, const SolverConfig& config,
                     std::size_t& eval_counter) {
  const Mat3 r_lm = x.ext.rotation();
  const Vec3 t_lm = x.ext.translation();
  constexpr std::size_t kChunk = 256;
  const std::size_t nchunks = num_chunks(corrs.size(), kChunk);
  std::vector<double> costs(nchunks, 0.0);
  parallel_chunks(corrs.size(), config.workers, kChunk,
                  [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double r = residual_cached(corrs[i], r_lm, t_lm, traj, x.tau);
      costs[chunk] += corrs[i].weight * huber_rho(r, config.huber_delta);
    }
  });
  double cost = 0.0;
  for (double c : costs) cost += c;
  eval_counter += corrs.size();
  return cost;
}

void check_rank(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const auto& evals = es.eigenvalues();  // ascending
  const double largest = evals[evals.size() - 1];
  if (evals[0] >= kRankRelTol * std::max(largest, 1e-300)) return;
  std::ostringstream msg;
  msg << "geometry constrains fewer than " << h.rows()
      << " parameters; null direction ~ [";
  const auto null_dir = es.eigenvectors().col(0);
  const char* names[] = {"roll", "pitch", "tx", "ty", "tau"};
  for (int i = 0; i < null_dir.size(); ++i) {
    msg << (i ? ", " : "") << names[i] << ": " << null_dir[i];
  }
  msg << "]";
  throw DegenerateGeometryError(msg.str());
}

ResidualStats compute_stats(std::vector<double> residuals, double huber_delta) {
  ResidualStats stats;
  if (residuals.empty()) return stats;
  double sq_sum = 0.0;
  std::size_t inliers = 0;
  for (double& r : residuals) {
    sq_sum += r * r;
    r = std::abs(r);
    if (r <= huber_delta) ++inliers;
  }
  stats.rms = std::sqrt(sq_sum / static_cast<double>(residuals.size()));
  auto mid = residuals.begin() + residuals.size() / 2;
  std::nth_element(residuals.begin(), mid, residuals.end());
  stats.median_abs = *mid;
  stats.inlier_fraction =
      static_cast<double>(inliers) / static_cast<double>(residuals.size());
  return stats;
}

void validate_config(const SolverConfig& config) {
  if (config.huber_delta <= 0.0) throw InputError("huber_delta must be positive");
  if (config.max_inner_iterations < 1 || config.max_outer_iterations < 1) {
    throw InputError("iteration caps must be >= 1");
  }
  if (config.relative_cost_tolerance <= 0.0 || config.outer_tol_rotation <= 0.0 ||
      config.outer_tol_translation <= 0.0) {
    throw InputError("solver tolerances must be positive");
  }
  if (config.lm_initial_lambda <= 0.0 || config.lm_lambda_up <= 1.0 ||
      config.lm_lambda_down <= 0.0 || config.lm_lambda_down >= 1.0) {
    throw InputError("LM lambda schedule must satisfy up > 1, 0 < down < 1");
  }
}

}  // namespace

Eigen::RowVector3d jacobian_translation(const Correspondence& c,
                                        const MotorTrajectory& traj,
                                        double time_offset) {
  return jac_translation_cached(c, traj, time_offset);
}

Eigen::RowVector3d jacobian_rotation(const Correspondence& c, const ExtrinsicParams& ext,
                                     const MotorTrajectory& traj,
                                     RotationJacobianForm form, double time_offset) {
  return jac_rotation_cached(c, ext.rotation(), traj, form, time_offset);
}

double huber_rho(double r, double delta) {
  const double a = std::abs(r);
  if (a <= delta) return r * r;
  return delta * (2.0 * a - delta);
}

double huber_weight(double r, double delta) {
  const double a = std::abs(r);
  if (a <= delta) return 1.0;
  return delta / a;
}

SolveResult solve(const AssociationProvider& provider, const ExtrinsicParams& ext_init,
                  const MotorTrajectory& traj, const SolverConfig& config) {
  validate_config(config);
  const int dim = config.optimize_time_offset ? 5 : 4;

  State x{ext_init, config.time_offset};
  SolveResult result;
  Assembly last;

  for (int outer = 0; outer < config.max_outer_iterations; ++outer) {
    const Association assoc = provider(x.ext);
    const auto& corrs = assoc.correspondences;
    if (corrs.size() < static_cast<std::size_t>(dim)) {
      throw DegenerateGeometryError("need at least " + std::to_string(dim) +
                                    " correspondences, got " +
                                    std::to_string(corrs.size()));
    }
    const State before = x;

    Assembly a = assemble(corrs, x, traj, config, result.residual_evaluations);
    check_rank(a.h);
    result.cost_trace.push_back({outer, 0, a.cost});

    double lambda = config.lm_initial_lambda;
    for (int inner = 1; inner <= config.max_inner_iterations; ++inner) {
      Eigen::MatrixXd damped = a.h;
      damped.diagonal() += lambda * a.h.diagonal().cwiseMax(1e-12);
      const Eigen::VectorXd delta = damped.ldlt().solve(-a.g);
      if (!delta.allFinite()) {
        lambda *= config.lm_lambda_up;
        if (lambda > kLambdaMax) break;
        continue;
      }
      const State trial = apply_step(x, delta);
      const double trial_cost =
          evaluate_cost(corrs, trial, traj, config, result.residual_evaluations);
      const double rel_change =
          std::abs(a.cost - trial_cost) / std::max(a.cost, 1e-300);
      if (std::isfinite(trial_cost) && trial_cost < a.cost) {
        x = trial;
        a = assemble(corrs, x, traj, config, result.residual_evaluations);
        lambda = std::max(lambda * config.lm_lambda_down, kLambdaMin);
        result.cost_trace.push_back({outer, inner, a.cost});
        if (a.cost == 0.0 || rel_change < config.relative_cost_tolerance) break;
      } else {
        // A rejected step within tolerance of the current cost is a plateau.
        if (std::isfinite(trial_cost) && rel_change < config.relative_cost_tolerance) {
          break;
        }
        lambda *= config.lm_lambda_up;
        if (lambda > kLambdaMax) break;
      }
    }

    result.param_trace.push_back({outer, x.ext.roll, x.ext.pitch, x.ext.tx, x.ext.ty,
                                  x.tau, corrs.size()});
    result.outer_iterations = outer + 1;
    result.correspondence_count = corrs.size();
    last = std::move(a);

    const double d_rot = std::max(std::abs(x.ext.roll - before.ext.roll),
                                  std::abs(x.ext.pitch - before.ext.pitch));
    const double d_tr = std::max(std::abs(x.ext.tx - before.ext.tx),
                                 std::abs(x.ext.ty - before.ext.ty));
    if (d_rot < config.outer_tol_rotation && d_tr < config.outer_tol_translation) {
      result.converged = true;
      break;
    }
  }

  result.ext = x.ext;
  result.time_offset = x.tau;
  result.final_cost = last.cost;
  result.stats = compute_stats(std::move(last.residuals), config.huber_delta);
  return result;
}

}  // namespace motocal
