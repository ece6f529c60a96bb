#pragma once

#include <cstdint>
#include <vector>

#include "pflow/common.hpp"
#include "pflow/drift.hpp"
#include "pflow/task.hpp"

namespace pflow {

enum class BaselineMode { kEma, kAnalytic, kNone };

/// Estimator for the reward baseline <y yhat> in the REINFORCE error delta.
struct BaselineConfig {
  BaselineMode mode = BaselineMode::kEma;
  double ema_decay = 0.99;
};

enum class LabelOrder {
  kRandom,
  /// +1, -1, +1, ... ; used to compare against a deterministic map.
  kAlternating,
};

struct SimConfig {
  double eta = 1e-3;
  long steps = 1000;
  int runs = 1;
  std::uint64_t seed = 0;
  Activation activation = Activation::kLogistic;
  BaselineConfig baseline;
  long record_every = 1;
  LabelOrder labels = LabelOrder::kRandom;
  int threads = 1;

  void validate() const;
};

/// Per-run weight snapshots of an ensemble. weights[k] is runs x N and holds
/// every run's weights after steps[k] updates (t[k] = eta * steps[k]).
struct EnsembleTrajectory {
  std::vector<long> steps;
  std::vector<double> t;
  std::vector<Matrix> weights;
  std::vector<char> diverged;  ///< per run: hit the |w| > 1e6 guard

  int runs() const { return weights.empty() ? 0 : static_cast<int>(weights.front().rows()); }
  bool any_diverged() const;
};

/// |w| above which a run is frozen and flagged as diverged.
inline constexpr double kWeightOverflow = 1e6;

double activate(Activation activation, double z);

/// One cross-entropy SGD step: w += eta ((ytilde - yhat) x - lambda w).
void sl_update(Vector& w, const Vector& x, int y, double eta, double lambda,
               Activation activation);

/// One REINFORCE step for a given sampled output `y_hat`:
///   w += eta (yhat delta phi(-yhat w.x) x - lambda w),  delta = y yhat - baseline.
/// Returns the reward y * yhat.
double rl_update(Vector& w, const Vector& x, int y, int y_hat, double baseline, double eta,
                 double lambda, Activation activation);

/// <y yhat> under the Gaussian model with the erf-sigmoid policy:
/// <phi(w.x)>_+ - <phi(w.x)>_-.
double analytic_reward_baseline(const TaskSpec& task, const Vector& w);

EnsembleTrajectory run_sl(const TaskSpec& task, double lambda, const Vector& w0,
                          const SimConfig& cfg);
EnsembleTrajectory run_rl(const TaskSpec& task, double lambda, const Vector& w0,
                          const SimConfig& cfg);
EnsembleTrajectory run_ensemble(const TaskSpec& task, const RuleConfig& rule, const Vector& w0,
                                const SimConfig& cfg);

/// Unbiased sample covariance of the rows of `samples` (rows >= 2).
Matrix sample_covariance(const Matrix& samples);

struct EnsembleStats {
  std::vector<double> t;
  std::vector<Vector> mean;   ///< ensemble mean <w>
  std::vector<Matrix> cov;    ///< empty unless requested
  std::vector<double> alignment_of_mean;  ///< cosine(<w>, reference)
  std::vector<double> mean_alignment;     ///< per-run cosine, averaged
  std::vector<double> std_alignment;
  std::vector<double> mean_norm;
  std::vector<double> std_norm;
  std::vector<double> mean_accuracy;  ///< NaN without a task
  std::vector<double> std_accuracy;
};

/// Throws ConfigError when `with_covariance` is set for a single-run ensemble.
EnsembleStats ensemble_stats(const EnsembleTrajectory& traj, const Vector& reference,
                             const TaskSpec* task = nullptr, bool with_covariance = false);

}  // namespace pflow
