#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pflow/common.hpp"
#include "pflow/drift.hpp"
#include "pflow/flow.hpp"
#include "pflow/simulate.hpp"
#include "pflow/task.hpp"

namespace pflow {

std::vector<double> linspace(double first, double last, int count);
std::vector<double> logspace(double first_exp10, double last_exp10, int count);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = slope * x + intercept. R^2 is NaN for fewer
/// than three points or a constant y.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Exponential fit y = A exp(-rate x) by least squares on log y.
struct DecayFit {
  double rate = 0.0;
  double log_amplitude = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

DecayFit fit_exponential(const std::vector<double>& x, const std::vector<double>& y);

/// Vector of length `norm` at `angle_deg` to `mu`, rotated towards the
/// coordinate axis least aligned with mu.
Vector initial_weights(const Vector& mu, double angle_deg, double norm);

struct CrossingTime {
  bool reached = false;
  double time = 0.0;
};

/// First time alignment(t) >= threshold, linearly interpolated between
/// recorded points.
CrossingTime crossing_time(const Trajectory& traj, double threshold);

struct AlignmentTimeConfig {
  Index dim = 2;
  double init_angle_deg = 60.0;
  double init_norm = 0.5;
  double threshold = 0.8;
  double lambda = 0.0;
  FlowConfig flow{0.01, 100.0};

  void validate() const;
};

CrossingTime time_to_alignment(const IsotropicTaskParams& params, Rule rule,
                               const AlignmentTimeConfig& cfg);

/// One scalar outcome per grid value. `ok[i]` is false when the outcome is
/// not available (threshold not reached, flow diverged, fit failed).
struct SweepResult {
  std::string parameter;
  Rule rule = Rule::kSupervised;
  std::vector<double> grid;
  std::vector<double> value;
  std::vector<char> ok;

  bool all_ok() const;
};

SweepResult noise_sweep(Rule rule, const std::vector<double>& sigmas,
                        const AlignmentTimeConfig& cfg, int threads = 1);
SweepResult anisotropy_sweep(Rule rule, const std::vector<double>& epsilons, double sigma,
                             const AlignmentTimeConfig& cfg, int threads = 1);

/// (T(h) - T(-h)) / 2h for the time-to-alignment T(epsilon).
double anisotropy_slope(Rule rule, double sigma, double h, const AlignmentTimeConfig& cfg);

struct CovDecayConfig {
  Index dim = 10;
  double lambda = 0.1;
  /// Cov(0) = cov0_scale * I, <w>(0) = 0.
  double cov0_scale = 0.1;
  FlowConfig flow{0.01, 40.0};
  /// Fraction of the window, counted from its end, used by the fit.
  double tail_fraction = 0.5;

  void validate() const;
};

/// Exponential rate of tr Cov on the tail of a covariance-flow trajectory.
/// Points after tr Cov reaches numerical zero are excluded.
DecayFit fit_trace_decay(const Trajectory& traj, double tail_fraction);

DecayFit covariance_decay_rate(const TaskSpec& task, const RuleConfig& rule,
                               const WeightState& state0, const CovDecayConfig& cfg);

SweepResult covariance_decay(Rule rule, const std::vector<double>& sigmas,
                             const CovDecayConfig& cfg, int threads = 1);

struct FixedPointCurve {
  std::vector<double> lambda;
  std::vector<double> norm;
  /// |w*| against ln(lambda).
  LinearFit fit;
  bool all_finite = true;
};

FixedPointCurve fixed_point_curve(Rule rule, double sigma, const std::vector<double>& lambdas);

struct ForgettingConfig {
  Rule rule = Rule::kSupervised;
  Index dim = 500;
  int num_tasks = 10;
  double sigma = 1.0;
  double lambda = 10.0;
  double eta = 1e-2;
  double threshold = 0.8;
  /// Perceptrons trained in lockstep on the same task sequence.
  int runs = 50;
  /// Independent task sequences (fresh random means) averaged into the curve.
  int repetitions = 20;
  long max_steps_per_task = 100000;
  /// Initial weights ~ N(0, init_scale^2 / dim).
  double init_scale = 0.1;
  Activation activation = Activation::kLogistic;
  BaselineConfig baseline;
  std::uint64_t seed = 0;
  int threads = 1;
  /// A curve point enters the fit while it exceeds noise_floor_z standard errors.
  double noise_floor_z = 2.0;
  int bootstrap = 1000;

  void validate() const;
};

struct ForgettingResult {
  /// Alignment of <w> with mu_0 after task k, averaged over repetitions.
  std::vector<double> curve;
  std::vector<double> curve_se;
  std::vector<std::vector<double>> per_repetition;
  /// Steps needed by each task, per repetition.
  std::vector<std::vector<long>> steps;
  DecayFit fit;
  /// Bootstrap 95% interval of the decay rate over repetitions.
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Fit over the leading curve points that stay above the noise floor.
DecayFit fit_forgetting_curve(const std::vector<double>& curve, const std::vector<double>& se,
                              double noise_floor_z);

/// Sequential training with the stochastic update rules. Throws
/// NumericalError when a task does not reach the threshold within the budget.
ForgettingResult forgetting_run(const ForgettingConfig& cfg);

/// Same protocol driven by the deterministic mean flow (runs is ignored).
ForgettingResult forgetting_flow(const ForgettingConfig& cfg, double dt = 1e-3);

}  // namespace pflow
