#include "pflow/flow.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "pflow/specfun.hpp"

namespace pflow {

void FlowConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("flow: dt must be positive");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("flow: t_max must be positive");
  if (dt > t_max) throw ConfigError("flow: dt must not exceed t_max");
  if (!(jacobian_step >= 1e-8 && jacobian_step <= 1e-2)) {
    throw ConfigError("flow: jacobian_step must lie in [1e-8, 1e-2]");
  }
  if (!(hessian_step >= 1e-8 && hessian_step <= 1e-1)) {
    throw ConfigError("flow: hessian_step must lie in [1e-8, 1e-1]");
  }
  if (record_every < 1) throw ConfigError("flow: record_every must be >= 1");
}

DriftField make_drift_field(const TaskSpec& task, const RuleConfig& rule) {
  rule.validate();
  auto shared = std::make_shared<const TaskSpec>(task);
  return [shared, rule](const Vector& w) { return drift(*shared, rule, w); };
}

Matrix drift_jacobian(const DriftField& field, const Vector& w, double step) {
  const Index n = w.size();
  Matrix jac(n, n);
  Vector probe = w;
  for (Index k = 0; k < n; ++k) {
    probe(k) = w(k) + step;
    const Vector up = field(probe);
    probe(k) = w(k) - step;
    const Vector down = field(probe);
    probe(k) = w(k);
    jac.col(k) = (up - down) / (2.0 * step);
  }
  return jac;
}

Vector hessian_correction(const DriftField& field, const Vector& w, const Matrix& cov,
                          double step) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
  const Vector center = field(w);
  Vector out = Vector::Zero(w.size());
  for (Index m = 0; m < w.size(); ++m) {
    const double weight = eig.eigenvalues()(m);
    if (weight <= 0.0) continue;
    const Vector dir = eig.eigenvectors().col(m);
    const Vector second =
        (field(w + step * dir) - 2.0 * center + field(w - step * dir)) / (step * step);
    out += 0.5 * weight * second;
  }
  return out;
}

double trcov_closed_form_rate(const Vector& mu, const Vector& w, const Matrix& cov,
                              double lambda) {
  const double z = mu.dot(w);
  // 2 * phi'(mu.w) with phi'(z) = exp(-pi z^2 / 16) / 4.
  const double slope = 0.5 * std::exp(-std::numbers::pi * z * z / 16.0);
  return -slope * mu.dot(cov * mu) - 2.0 * lambda * cov.trace();
}

namespace {

class Recorder {
 public:
  Recorder(const FlowConfig& cfg, const Vector& reference, const TaskSpec* task)
      : cfg_(cfg), reference_(reference), task_(task) {}

  void record(Trajectory& traj, double t, const Vector& mean, double tr_cov,
              double correction_norm) const {
    TrajectoryPoint p;
    p.t = t;
    p.norm = mean.norm();
    p.mu_dot_w = reference_.size() == mean.size() ? reference_.dot(mean) : 0.0;
    p.alignment = reference_.size() == mean.size() ? alignment(mean, reference_) : 0.0;
    p.tr_cov = tr_cov;
    p.correction_norm = correction_norm;
    p.accuracy = std::numeric_limits<double>::quiet_NaN();
    if (task_ != nullptr) {
      if (mean.isZero(0.0)) {
        p.accuracy = 0.5;
      } else {
        try {
          p.accuracy = model_accuracy(*task_, mean);
        } catch (const NumericalError&) {
        }
      }
    }
    if (cfg_.record_mean) p.mean = mean;
    traj.points.push_back(std::move(p));
  }

 private:
  const FlowConfig& cfg_;
  const Vector& reference_;
  const TaskSpec* task_;
};

long step_count(const FlowConfig& cfg) {
  return static_cast<long>(std::ceil(cfg.t_max / cfg.dt - 1e-9));
}

double step_size(const FlowConfig& cfg, long n, long total) {
  return n + 1 < total ? cfg.dt : cfg.t_max - cfg.dt * static_cast<double>(total - 1);
}

}  // namespace

Trajectory integrate_mean_flow(const DriftField& field, const Vector& w0, const FlowConfig& cfg,
                               const Vector& reference, const TaskSpec* task) {
  cfg.validate();
  if (!w0.allFinite()) throw ConfigError("flow: initial weights must be finite");
  const Recorder rec(cfg, reference, task);
  Trajectory traj;
  Vector w = w0;
  const long total = step_count(cfg);
  double t = 0.0;
  rec.record(traj, t, w, 0.0, 0.0);
  for (long n = 0; n < total; ++n) {
    const double h = step_size(cfg, n, total);
    const Vector k1 = field(w);
    const Vector k2 = field(w + 0.5 * h * k1);
    const Vector k3 = field(w + 0.5 * h * k2);
    const Vector k4 = field(w + h * k3);
    w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = cfg.dt * static_cast<double>(n) + h;
    const bool diverged = !w.allFinite() || w.norm() > kDivergenceNorm;
    if (diverged) traj.status = FlowStatus::kDiverged;
    if ((n + 1) % cfg.record_every == 0 || n + 1 == total || diverged) {
      rec.record(traj, t, w, 0.0, 0.0);
    }
    if (diverged) break;
  }
  traj.final_state = {w, Matrix::Zero(w.size(), w.size()), t};
  return traj;
}

Trajectory integrate_mean_flow(const TaskSpec& task, const RuleConfig& rule, const Vector& w0,
                               const FlowConfig& cfg) {
  if (w0.size() != task.dim()) throw ConfigError("flow: w0 dimension does not match task");
  return integrate_mean_flow(make_drift_field(task, rule), w0, cfg, task.mu_pos(), &task);
}

Trajectory integrate_cov_flow(const DriftField& field, const WeightState& state0,
                              const FlowConfig& cfg, const Vector& reference,
                              const TaskSpec* task) {
  cfg.validate();
  const Index n = state0.mean.size();
  if (state0.cov.rows() != n || state0.cov.cols() != n) {
    throw ConfigError("flow: covariance shape does not match the mean");
  }
  if (!state0.mean.allFinite() || !state0.cov.allFinite()) {
    throw ConfigError("flow: initial state must be finite");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> check(0.5 * (state0.cov + state0.cov.transpose()),
                                              Eigen::EigenvaluesOnly);
  if (check.eigenvalues().minCoeff() < -1e-9) {
    throw ConfigError("flow: initial covariance is not positive semidefinite");
  }

  struct Rate {
    Vector mean;
    Matrix cov;
    double correction_norm;
  };
  const auto rate = [&](const Vector& m, const Matrix& c) {
    Rate r;
    r.mean = field(m);
    r.correction_norm = 0.0;
    if (cfg.hessian_correction) {
      const Vector corr = hessian_correction(field, m, c, cfg.hessian_step);
      r.correction_norm = corr.norm();
      r.mean += corr;
    }
    const Matrix jac = drift_jacobian(field, m, cfg.jacobian_step);
    r.cov = c * jac.transpose() + jac * c;
    return r;
  };

  const Recorder rec(cfg, reference, task);
  Trajectory traj;
  Vector m = state0.mean;
  Matrix c = 0.5 * (state0.cov + state0.cov.transpose());
  const long total = step_count(cfg);
  double t = state0.t;
  double last_correction = cfg.hessian_correction ? rate(m, c).correction_norm : 0.0;
  rec.record(traj, t, m, c.trace(), last_correction);
  for (long k = 0; k < total; ++k) {
    const double h = step_size(cfg, k, total);
    const Rate k1 = rate(m, c);
    const Rate k2 = rate(m + 0.5 * h * k1.mean, c + 0.5 * h * k1.cov);
    const Rate k3 = rate(m + 0.5 * h * k2.mean, c + 0.5 * h * k2.cov);
    const Rate k4 = rate(m + h * k3.mean, c + h * k3.cov);
    m += h / 6.0 * (k1.mean + 2.0 * k2.mean + 2.0 * k3.mean + k4.mean);
    c += h / 6.0 * (k1.cov + 2.0 * k2.cov + 2.0 * k3.cov + k4.cov);
    c = (0.5 * (c + c.transpose())).eval();
    last_correction = k1.correction_norm;
    t = state0.t + cfg.dt * static_cast<double>(k) + h;
    const bool diverged = !m.allFinite() || !c.allFinite() || m.norm() > kDivergenceNorm;
    if (diverged) traj.status = FlowStatus::kDiverged;
    if ((k + 1) % cfg.record_every == 0 || k + 1 == total || diverged) {
      rec.record(traj, t, m, c.trace(), last_correction);
    }
    if (diverged) break;
  }
  traj.final_state = {m, c, t};
  return traj;
}

Trajectory integrate_cov_flow(const TaskSpec& task, const RuleConfig& rule,
                              const WeightState& state0, const FlowConfig& cfg) {
  if (state0.mean.size() != task.dim()) {
    throw ConfigError("flow: initial state dimension does not match task");
  }
  return integrate_cov_flow(make_drift_field(task, rule), state0, cfg, task.mu_pos(), &task);
}

// ---------------------------------------------------------------------------
// Fixed points

double fixed_point_residual(Rule rule, double sigma, double lambda, double norm) {
  const Vector mu = Vector::Constant(1, 1.0);
  const Vector w = Vector::Constant(1, norm);
  const IsotropicRates r = rule == Rule::kSupervised ? isotropic_sl_rates(mu, sigma, w, lambda)
                                                     : isotropic_rl_rates(mu, sigma, w, lambda);
  return r.mu_dot_w;
}

FixedPoint find_fixed_point(const IsotropicTaskParams& params, Rule rule, double lambda) {
  if (params.epsilon != 0.0) throw ConfigError("fixed point: task must be isotropic");
  if (!(lambda >= 0.0)) throw ConfigError("fixed point: lambda must be >= 0");
  if (!(params.sigma >= 0.0)) throw ConfigError("fixed point: sigma must be >= 0");
  const double mu_norm = params.mu.norm();
  if (!(mu_norm > 0.0)) throw ConfigError("fixed point: mean must be non-zero");

  FixedPoint fp;
  fp.direction = params.mu / mu_norm;
  if (lambda == 0.0 && params.sigma == 0.0) {
    fp.status = FlowStatus::kDiverged;
    fp.norm = std::numeric_limits<double>::infinity();
    return fp;
  }

  const Vector mu = Vector::Constant(1, mu_norm);
  const auto residual = [&](double norm) {
    const Vector w = Vector::Constant(1, norm);
    const IsotropicRates r = rule == Rule::kSupervised
                                 ? isotropic_sl_rates(mu, params.sigma, w, lambda)
                                 : isotropic_rl_rates(mu, params.sigma, w, lambda);
    return r.mu_dot_w / mu_norm;
  };

  // Geometric bracket scan on [1e-8, 1e3], then bisection.
  constexpr double kLow = 1e-8;
  constexpr double kHigh = 1e3;
  constexpr int kScan = 2000;
  double lo = kLow;
  double r_lo = residual(lo);
  double hi = lo;
  bool bracketed = false;
  for (int i = 1; i <= kScan; ++i) {
    hi = kLow * std::pow(kHigh / kLow, static_cast<double>(i) / kScan);
    const double r_hi = residual(hi);
    if ((r_lo > 0.0) != (r_hi > 0.0) || r_hi == 0.0) {
      bracketed = true;
      break;
    }
    lo = hi;
    r_lo = r_hi;
  }
  if (!bracketed) {
    fp.status = FlowStatus::kDiverged;
    fp.norm = std::numeric_limits<double>::infinity();
    return fp;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r_mid = residual(mid);
    if (r_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((r_mid > 0.0) == (r_lo > 0.0)) {
      lo = mid;
      r_lo = r_mid;
    } else {
      hi = mid;
    }
  }
  fp.norm = 0.5 * (lo + hi);
  fp.residual = residual(fp.norm);
  return fp;
}

}  // namespace pflow
