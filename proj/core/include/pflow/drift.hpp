#pragma once

#include "pflow/common.hpp"
#include "pflow/task.hpp"

namespace pflow {

/// Projections of one Gaussian class onto the scaled weight w~ = w sqrt(pi/8).
struct ProjectionStats {
  Vector w_tilde;
  double a = 0.0;  ///< mu . w~
  double b = 0.0;  ///< sqrt(w~^T Sigma w~)
  Vector sigma_w;  ///< Sigma w~

  static ProjectionStats compute(const Vector& mu, const Covariance& sigma, const Vector& w);
};

struct RuleConfig {
  Rule rule = Rule::kSupervised;
  double lambda = 0.0;
  /// Only the simulator honours this; the closed-form drift always uses the erf sigmoid.
  Activation activation = Activation::kLogistic;

  void validate() const;
};

// Gaussian moments of the erf sigmoid phi for x ~ N(mu, sigma).

/// <phi(w.x)> = Phi(a / sqrt(1 + b^2)).
double gauss_phi_mean(const Vector& mu, const Covariance& sigma, const Vector& w);
/// <phi(w.x) x>.
Vector gauss_phi_x_mean(const Vector& mu, const Covariance& sigma, const Vector& w);
/// <phi(w.x)^2> = Phi(a / sqrt(1 + b^2)) - 2 T(a / sqrt(1 + b^2), 1 / sqrt(1 + 2 b^2)).
double gauss_phi2_mean(const Vector& mu, const Covariance& sigma, const Vector& w);
/// <phi(w.x)^2 x>.
Vector gauss_phi2_x_mean(const Vector& mu, const Covariance& sigma, const Vector& w);

/// Expected cross-entropy SGD update: 1/2 <(1 - phi) x>_+ - 1/2 <phi x>_- - lambda w.
Vector sl_drift(const TaskSpec& task, const Vector& w, double lambda);

/// Expected REINFORCE update, assembled from the Owen's T closed form.
Vector rl_drift(const TaskSpec& task, const Vector& w, double lambda);

/// Same quantity as rl_drift(), composed from the moment integrals as
/// (<phi x> - <phi^2 x>)_+ - (<phi x> - <phi^2 x>)_- - lambda w.
Vector rl_drift_moment_form(const TaskSpec& task, const Vector& w, double lambda);

Vector drift(const TaskSpec& task, const RuleConfig& rule, const Vector& w);

/// Reduced scalar flow for mu_pm = +-mu and Sigma = sigma^2 I.
struct IsotropicRates {
  double mu_dot_w = 0.0;  ///< d(mu . w)/dt
  double norm_sq = 0.0;   ///< d|w|^2/dt
};

IsotropicRates isotropic_sl_rates(const Vector& mu, double sigma, const Vector& w,
                                  double lambda = 0.0);
IsotropicRates isotropic_rl_rates(const Vector& mu, double sigma, const Vector& w,
                                  double lambda = 0.0);

}  // namespace pflow
