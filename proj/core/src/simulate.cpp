#include "pflow/simulate.hpp"

#include <cmath>
#include <limits>

#include "pflow/parallel.hpp"
#include "pflow/specfun.hpp"

namespace pflow {

void SimConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("simulate: eta must be >= 0");
  if (steps < 0) throw ConfigError("simulate: steps must be >= 0");
  if (runs < 1) throw ConfigError("simulate: runs must be >= 1");
  if (record_every < 1) throw ConfigError("simulate: record_every must be >= 1");
  if (threads < 1) throw ConfigError("simulate: threads must be >= 1");
  if (baseline.mode == BaselineMode::kEma &&
      !(baseline.ema_decay > 0.0 && baseline.ema_decay < 1.0)) {
    throw ConfigError("simulate: ema_decay must lie in (0, 1)");
  }
}

bool EnsembleTrajectory::any_diverged() const {
  for (char d : diverged) {
    if (d) return true;
  }
  return false;
}

double activate(Activation activation, double z) {
  return activation == Activation::kErfSigmoid ? specfun::erf_sigmoid(z) : specfun::logistic(z);
}

void sl_update(Vector& w, const Vector& x, int y, double eta, double lambda,
               Activation activation) {
  const double target = y > 0 ? 1.0 : 0.0;
  const double err = target - activate(activation, w.dot(x));
  w = (1.0 - eta * lambda) * w + (eta * err) * x;
}

double rl_update(Vector& w, const Vector& x, int y, int y_hat, double baseline, double eta,
                 double lambda, Activation activation) {
  const double reward = static_cast<double>(y * y_hat);
  const double delta = reward - baseline;
  const double z = w.dot(x);
  const double gain = static_cast<double>(y_hat) * delta * activate(activation, -y_hat * z);
  w = (1.0 - eta * lambda) * w + (eta * gain) * x;
  return reward;
}

double analytic_reward_baseline(const TaskSpec& task, const Vector& w) {
  return gauss_phi_mean(task.mu_pos(), task.sigma_pos(), w) -
         gauss_phi_mean(task.mu_neg(), task.sigma_neg(), w);
}

namespace {

std::vector<long> record_steps(const SimConfig& cfg) {
  std::vector<long> out;
  for (long s = 0; s < cfg.steps; s += cfg.record_every) out.push_back(s);
  out.push_back(cfg.steps);
  return out;
}

}  // namespace

EnsembleTrajectory run_ensemble(const TaskSpec& task, const RuleConfig& rule, const Vector& w0,
                                const SimConfig& cfg) {
  cfg.validate();
  rule.validate();
  if (w0.size() != task.dim()) throw ConfigError("simulate: w0 dimension does not match task");

  EnsembleTrajectory traj;
  traj.steps = record_steps(cfg);
  for (long s : traj.steps) traj.t.push_back(cfg.eta * static_cast<double>(s));
  traj.weights.assign(traj.steps.size(), Matrix(cfg.runs, task.dim()));
  traj.diverged.assign(static_cast<std::size_t>(cfg.runs), 0);

  const bool reinforce = rule.rule == Rule::kReinforce;
  parallel_for(cfg.runs, cfg.threads, [&](int run) {
    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(run));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    TaskSampler sampler(task);
    Vector w = w0;
    Vector x(task.dim());
    double baseline = 0.0;
    bool frozen = false;
    std::size_t next_record = 0;
    for (long step = 0; step <= cfg.steps; ++step) {
      if (next_record < traj.steps.size() && traj.steps[next_record] == step) {
        traj.weights[next_record].row(run) = w.transpose();
        ++next_record;
      }
      if (step == cfg.steps) break;
      int y = 0;
      if (cfg.labels == LabelOrder::kAlternating) {
        y = step % 2 == 0 ? 1 : -1;
        sampler.draw_given(rng, y, x);
      } else {
        y = sampler.draw(rng, x);
      }
      if (frozen) continue;
      if (!reinforce) {
        sl_update(w, x, y, cfg.eta, rule.lambda, cfg.activation);
      } else {
        const double p_plus = activate(cfg.activation, w.dot(x));
        const int y_hat = uniform(rng) < p_plus ? 1 : -1;
        double b = 0.0;
        if (cfg.baseline.mode == BaselineMode::kEma) b = baseline;
        if (cfg.baseline.mode == BaselineMode::kAnalytic) b = analytic_reward_baseline(task, w);
        const double reward = rl_update(w, x, y, y_hat, b, cfg.eta, rule.lambda, cfg.activation);
        if (cfg.baseline.mode == BaselineMode::kEma) {
          baseline = cfg.baseline.ema_decay * baseline + (1.0 - cfg.baseline.ema_decay) * reward;
        }
      }
      if (!w.allFinite() || w.norm() > kWeightOverflow) {
        traj.diverged[static_cast<std::size_t>(run)] = 1;
        frozen = true;
      }
    }
  });
  return traj;
}

EnsembleTrajectory run_sl(const TaskSpec& task, double lambda, const Vector& w0,
                          const SimConfig& cfg) {
  return run_ensemble(task, RuleConfig{Rule::kSupervised, lambda, cfg.activation}, w0, cfg);
}

EnsembleTrajectory run_rl(const TaskSpec& task, double lambda, const Vector& w0,
                          const SimConfig& cfg) {
  return run_ensemble(task, RuleConfig{Rule::kReinforce, lambda, cfg.activation}, w0, cfg);
}

Matrix sample_covariance(const Matrix& samples) {
  if (samples.rows() < 2) throw ConfigError("covariance needs at least two samples");
  const Vector mean = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - mean.transpose();
  return centered.transpose() * centered / static_cast<double>(samples.rows() - 1);
}

namespace {

void mean_and_std(const std::vector<double>& v, double& mean, double& sd) {
  const double n = static_cast<double>(v.size());
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

}  // namespace

EnsembleStats ensemble_stats(const EnsembleTrajectory& traj, const Vector& reference,
                             const TaskSpec* task, bool with_covariance) {
  if (with_covariance && traj.runs() < 2) {
    throw ConfigError("ensemble_stats: covariance requires at least two runs");
  }
  EnsembleStats st;
  st.t = traj.t;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const Matrix& snap : traj.weights) {
    const Vector mean = snap.colwise().mean().transpose();
    st.mean.push_back(mean);
    if (with_covariance) st.cov.push_back(sample_covariance(snap));
    st.alignment_of_mean.push_back(alignment(mean, reference));

    std::vector<double> align, norm, acc;
    for (Index r = 0; r < snap.rows(); ++r) {
      const Vector w = snap.row(r).transpose();
      align.push_back(alignment(w, reference));
      norm.push_back(w.norm());
      if (task != nullptr) {
        double a = nan;
        if (w.isZero(0.0)) {
          a = 0.5;
        } else {
          try {
            a = model_accuracy(*task, w);
          } catch (const NumericalError&) {
          }
        }
        acc.push_back(a);
      }
    }
    double m = 0.0, s = 0.0;
    mean_and_std(align, m, s);
    st.mean_alignment.push_back(m);
    st.std_alignment.push_back(s);
    mean_and_std(norm, m, s);
    st.mean_norm.push_back(m);
    st.std_norm.push_back(s);
    if (task != nullptr) {
      mean_and_std(acc, m, s);
    } else {
      m = s = nan;
    }
    st.mean_accuracy.push_back(m);
    st.std_accuracy.push_back(s);
  }
  return st;
}

}  // namespace pflow
