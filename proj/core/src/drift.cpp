#include "pflow/drift.hpp"

#include <cmath>
#include <numbers>

#include "pflow/specfun.hpp"

namespace pflow {
namespace {

const double kTildeScale = std::sqrt(std::numbers::pi / 8.0);
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

void check_dims(const Vector& mu, const Covariance& sigma, const Vector& w) {
  if (mu.size() != w.size() || sigma.dim() != w.size()) {
    throw ConfigError("drift: mean, covariance and weights must share one dimension");
  }
}

// Shared scalars for the four moment integrals of one class.
struct ClassTerms {
  ProjectionStats stats;
  double s = 1.0;      // sqrt(1 + b^2)
  double r = 1.0;      // sqrt(1 + 2 b^2)
  double cdf = 0.5;    // Phi(a / s)
  double gauss = 0.0;  // exp(-a^2 / (2 s^2)) / (sqrt(2 pi) s)

  ClassTerms(const Vector& mu, const Covariance& sigma, const Vector& w)
      : stats(ProjectionStats::compute(mu, sigma, w)) {
    const double b2 = stats.b * stats.b;
    s = std::sqrt(1.0 + b2);
    r = std::sqrt(1.0 + 2.0 * b2);
    cdf = specfun::normal_cdf(stats.a / s);
    gauss = kInvSqrt2Pi / s * std::exp(-stats.a * stats.a / (2.0 * s * s));
  }

  double owen() const { return specfun::owens_t(stats.a / s, 1.0 / r); }
};

}  // namespace

ProjectionStats ProjectionStats::compute(const Vector& mu, const Covariance& sigma,
                                         const Vector& w) {
  check_dims(mu, sigma, w);
  ProjectionStats p;
  p.w_tilde = kTildeScale * w;
  p.a = mu.dot(p.w_tilde);
  p.sigma_w = sigma.apply(p.w_tilde);
  p.b = std::sqrt(std::max(0.0, p.w_tilde.dot(p.sigma_w)));
  return p;
}

void RuleConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
}

double gauss_phi_mean(const Vector& mu, const Covariance& sigma, const Vector& w) {
  return ClassTerms(mu, sigma, w).cdf;
}

Vector gauss_phi_x_mean(const Vector& mu, const Covariance& sigma, const Vector& w) {
  const ClassTerms c(mu, sigma, w);
  return mu * c.cdf + c.stats.sigma_w * c.gauss;
}

double gauss_phi2_mean(const Vector& mu, const Covariance& sigma, const Vector& w) {
  const ClassTerms c(mu, sigma, w);
  return c.cdf - 2.0 * c.owen();
}

Vector gauss_phi2_x_mean(const Vector& mu, const Covariance& sigma, const Vector& w) {
  const ClassTerms c(mu, sigma, w);
  const double phi2 = c.cdf - 2.0 * c.owen();
  const double inner = specfun::normal_cdf(c.stats.a / (c.s * c.r));
  return mu * phi2 + c.stats.sigma_w * (2.0 * c.gauss * inner);
}

Vector sl_drift(const TaskSpec& task, const Vector& w, double lambda) {
  const ClassTerms pos(task.mu_pos(), task.sigma_pos(), w);
  const ClassTerms neg(task.mu_neg(), task.sigma_neg(), w);
  Vector f = 0.5 * (1.0 - pos.cdf) * task.mu_pos() - 0.5 * pos.gauss * pos.stats.sigma_w -
             0.5 * neg.cdf * task.mu_neg() - 0.5 * neg.gauss * neg.stats.sigma_w;
  f -= lambda * w;
  return f;
}

Vector rl_drift(const TaskSpec& task, const Vector& w, double lambda) {
  // Per class: (Sigma w~) g (1 - 2 Phi(a / (s r))) + 2 mu T(a / s, 1 / r).
  const auto class_term = [&w](const Vector& mu, const Covariance& sigma) {
    const ClassTerms c(mu, sigma, w);
    const double inner = specfun::normal_cdf(c.stats.a / (c.s * c.r));
    return Vector(c.stats.sigma_w * (c.gauss * (1.0 - 2.0 * inner)) + 2.0 * c.owen() * mu);
  };
  Vector f = class_term(task.mu_pos(), task.sigma_pos()) -
             class_term(task.mu_neg(), task.sigma_neg());
  f -= lambda * w;
  return f;
}

Vector rl_drift_moment_form(const TaskSpec& task, const Vector& w, double lambda) {
  const auto product_moment = [&w](const Vector& mu, const Covariance& sigma) {
    return Vector(gauss_phi_x_mean(mu, sigma, w) - gauss_phi2_x_mean(mu, sigma, w));
  };
  Vector f = product_moment(task.mu_pos(), task.sigma_pos()) -
             product_moment(task.mu_neg(), task.sigma_neg());
  f -= lambda * w;
  return f;
}

Vector drift(const TaskSpec& task, const RuleConfig& rule, const Vector& w) {
  return rule.rule == Rule::kSupervised ? sl_drift(task, w, rule.lambda)
                                        : rl_drift(task, w, rule.lambda);
}

namespace {

struct IsoScalars {
  double mu_w_tilde;  // mu . w~
  double s;           // sqrt(1 + sigma^2 |w~|^2)
  double b2;          // sigma^2 |w~|^2
  double gauss_exp;   // exp(-(mu . w~)^2 / (2 s^2))
};

IsoScalars iso_scalars(const Vector& mu, double sigma, const Vector& w) {
  if (mu.size() != w.size()) throw ConfigError("rates: mean and weights differ in dimension");
  const Vector wt = kTildeScale * w;
  IsoScalars v{};
  v.mu_w_tilde = mu.dot(wt);
  v.b2 = sigma * sigma * wt.squaredNorm();
  v.s = std::sqrt(1.0 + v.b2);
  v.gauss_exp = std::exp(-v.mu_w_tilde * v.mu_w_tilde / (2.0 * v.s * v.s));
  return v;
}

}  // namespace

IsotropicRates isotropic_sl_rates(const Vector& mu, double sigma, const Vector& w,
                                  double lambda) {
  const IsoScalars v = iso_scalars(mu, sigma, w);
  const double miss = 1.0 - specfun::normal_cdf(v.mu_w_tilde / v.s);
  const double s2 = sigma * sigma;
  IsotropicRates r;
  r.mu_dot_w = mu.squaredNorm() * miss - kInvSqrt2Pi * s2 * v.mu_w_tilde / v.s * v.gauss_exp -
               lambda * mu.dot(w);
  r.norm_sq = 2.0 * w.dot(mu) * miss - 0.5 * s2 * w.squaredNorm() / v.s * v.gauss_exp -
              2.0 * lambda * w.squaredNorm();
  return r;
}

IsotropicRates isotropic_rl_rates(const Vector& mu, double sigma, const Vector& w,
                                  double lambda) {
  const IsoScalars v = iso_scalars(mu, sigma, w);
  const double owen = specfun::owens_t(v.mu_w_tilde / v.s, 1.0 / std::sqrt(1.0 + 2.0 * v.b2));
  const double e = std::erf(v.mu_w_tilde / (v.s * std::sqrt(2.0 + 4.0 * v.b2)));
  const double s2 = sigma * sigma;
  IsotropicRates r;
  r.mu_dot_w = mu.squaredNorm() * 4.0 * owen -
               kInvSqrt2Pi * 2.0 * s2 * v.mu_w_tilde / v.s * v.gauss_exp * e -
               lambda * mu.dot(w);
  r.norm_sq = 8.0 * w.dot(mu) * owen - 0.5 * 2.0 * s2 * w.squaredNorm() / v.s * v.gauss_exp * e -
              2.0 * lambda * w.squaredNorm();
  return r;
}

}  // namespace pflow
