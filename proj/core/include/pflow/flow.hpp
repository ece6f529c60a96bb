#pragma once

#include <functional>
#include <vector>

#include "pflow/common.hpp"
#include "pflow/drift.hpp"
#include "pflow/task.hpp"

namespace pflow {

/// Mean and covariance of the weight distribution at continuous time t
/// (t counts learning-rate-weighted steps, t = eta * step).
struct WeightState {
  Vector mean;
  Matrix cov;
  double t = 0.0;
};

struct FlowConfig {
  double dt = 0.01;
  double t_max = 10.0;
  /// Adds 1/2 sum_kl Cov_kl d_k d_l <f> to the mean flow.
  bool hessian_correction = false;
  /// Central-difference step for the drift Jacobian.
  double jacobian_step = 1e-5;
  /// Central-difference step for the second directional derivatives.
  double hessian_step = 1e-4;
  int record_every = 1;
  /// Keep the full mean vector in every recorded point.
  bool record_mean = false;

  void validate() const;
};

enum class FlowStatus { kOk, kDiverged };

struct TrajectoryPoint {
  double t = 0.0;
  double alignment = 0.0;  ///< cosine between <w> and the task's positive mean
  double norm = 0.0;       ///< |<w>|
  double mu_dot_w = 0.0;   ///< mu_pos . <w>
  double tr_cov = 0.0;
  double accuracy = 0.5;   ///< model_accuracy of <w>; 1/2 at w = 0
  double correction_norm = 0.0;  ///< |Hessian correction| when enabled
  Vector mean;             ///< empty unless FlowConfig::record_mean
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  FlowStatus status = FlowStatus::kOk;
  WeightState final_state;
};

/// |<w>| above which an integration stops with FlowStatus::kDiverged.
inline constexpr double kDivergenceNorm = 1e6;

using DriftField = std::function<Vector(const Vector&)>;

DriftField make_drift_field(const TaskSpec& task, const RuleConfig& rule);

/// d<w>/dt = <f>(<w>), classical RK4 with a fixed step.
Trajectory integrate_mean_flow(const TaskSpec& task, const RuleConfig& rule, const Vector& w0,
                               const FlowConfig& cfg);

/// Joint mean/covariance flow:
///   d<w>/dt = (1 + 1/2 sum_kl Cov_kl d_k d_l) <f>(<w>)   (correction optional)
///   dCov/dt = Cov J^T + J Cov,   J_jk = d_k <f_j>(<w>).
Trajectory integrate_cov_flow(const TaskSpec& task, const RuleConfig& rule,
                              const WeightState& state0, const FlowConfig& cfg);

/// Lower-level variants over an arbitrary drift field. `reference` is the
/// direction used for the alignment/mu_dot_w observables; `task` (optional)
/// supplies model accuracy.
Trajectory integrate_mean_flow(const DriftField& field, const Vector& w0, const FlowConfig& cfg,
                               const Vector& reference, const TaskSpec* task = nullptr);
Trajectory integrate_cov_flow(const DriftField& field, const WeightState& state0,
                              const FlowConfig& cfg, const Vector& reference,
                              const TaskSpec* task = nullptr);

/// Central finite-difference Jacobian J_jk = d_k f_j.
Matrix drift_jacobian(const DriftField& field, const Vector& w, double step);

/// 1/2 sum_kl Cov_kl d_k d_l f(w), from second differences along the
/// eigenvectors of Cov.
Vector hessian_correction(const DriftField& field, const Vector& w, const Matrix& cov,
                          double step);

/// d tr(Cov)/dt for SL in the noiseless limit x = +-mu:
///   -(exp(-pi (mu.w)^2 / 16) / 2) mu^T Cov mu - 2 lambda tr(Cov).
double trcov_closed_form_rate(const Vector& mu, const Vector& w, const Matrix& cov,
                              double lambda);

struct FixedPoint {
  FlowStatus status = FlowStatus::kOk;
  double norm = 0.0;   ///< |<w*>|
  Vector direction;    ///< mu / |mu|
  double residual = 0.0;
};

/// Reduced 1-D fixed-point residual along the mean direction for |mu| = 1:
/// d(mu . w)/dt evaluated at w = norm * mu.
double fixed_point_residual(Rule rule, double sigma, double lambda, double norm);

/// Unique aligned fixed point of the isotropic mean flow. Returns kDiverged
/// when lambda = sigma = 0 (the weights grow without bound).
FixedPoint find_fixed_point(const IsotropicTaskParams& params, Rule rule, double lambda);

}  // namespace pflow
