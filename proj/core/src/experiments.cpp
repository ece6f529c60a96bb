#include "pflow/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "pflow/parallel.hpp"

namespace pflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_increasing(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw ConfigError(std::string(what) + ": grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw ConfigError(std::string(what) + ": grid must be strictly increasing");
    }
  }
}

}  // namespace

std::vector<double> linspace(double first, double last, int count) {
  if (count < 1) throw ConfigError("linspace: count must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(count), first);
  for (int i = 1; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = first + (last - first) * i / (count - 1);
  }
  return out;
}

std::vector<double> logspace(double first_exp10, double last_exp10, int count) {
  std::vector<double> out = linspace(first_exp10, last_exp10, count);
  for (double& v : out) v = std::pow(10.0, v);
  return out;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("linear_fit: size mismatch");
  if (x.size() < 2) throw ConfigError("linear_fit: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("linear_fit: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = x.size();
  fit.r_squared = (x.size() < 3 || syy == 0.0) ? kNaN : sxy * sxy / (sxx * syy);
  return fit;
}

DecayFit fit_exponential(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> logs;
  logs.reserve(y.size());
  for (double v : y) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw NumericalError("fit_exponential: values must be positive and finite");
    }
    logs.push_back(std::log(v));
  }
  const LinearFit lf = linear_fit(x, logs);
  return {-lf.slope, lf.intercept, lf.r_squared, lf.points};
}

Vector initial_weights(const Vector& mu, double angle_deg, double norm) {
  if (mu.size() < 2) throw ConfigError("initial_weights: dimension must be >= 2");
  const double mu_norm = mu.norm();
  if (!(mu_norm > 0.0)) throw ConfigError("initial_weights: mean must be non-zero");
  const Vector u = mu / mu_norm;
  Index axis = 0;
  u.cwiseAbs().minCoeff(&axis);
  Vector v = -u(axis) * u;
  v(axis) += 1.0;
  v.normalize();
  const double theta = angle_deg * std::numbers::pi / 180.0;
  return norm * (std::cos(theta) * u + std::sin(theta) * v);
}

CrossingTime crossing_time(const Trajectory& traj, double threshold) {
  const auto& pts = traj.points;
  if (pts.empty()) return {false, kNaN};
  if (pts.front().alignment >= threshold) return {true, pts.front().t};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].alignment >= threshold) {
      const double a0 = pts[i - 1].alignment;
      const double a1 = pts[i].alignment;
      const double frac = (threshold - a0) / (a1 - a0);
      return {true, pts[i - 1].t + frac * (pts[i].t - pts[i - 1].t)};
    }
  }
  return {false, kNaN};
}

void AlignmentTimeConfig::validate() const {
  if (dim < 2) throw ConfigError("time_to_alignment: dim must be >= 2");
  if (!(threshold > -1.0 && threshold < 1.0)) {
    throw ConfigError("time_to_alignment: threshold must lie in (-1, 1)");
  }
  if (!(init_norm > 0.0)) throw ConfigError("time_to_alignment: init_norm must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("time_to_alignment: lambda must be >= 0");
  flow.validate();
}

CrossingTime time_to_alignment(const IsotropicTaskParams& params, Rule rule,
                               const AlignmentTimeConfig& cfg) {
  cfg.validate();
  const TaskSpec task = params.to_task();
  const Vector w0 = initial_weights(params.mu, cfg.init_angle_deg, cfg.init_norm);
  const RuleConfig rc{rule, cfg.lambda, Activation::kErfSigmoid};
  return crossing_time(integrate_mean_flow(task, rc, w0, cfg.flow), cfg.threshold);
}

bool SweepResult::all_ok() const {
  return std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
}

namespace {

SweepResult time_sweep(Rule rule, const std::vector<double>& grid, const char* name,
                       const AlignmentTimeConfig& cfg, int threads,
                       const std::function<IsotropicTaskParams(double)>& make_params) {
  require_increasing(grid, name);
  cfg.validate();
  SweepResult res;
  res.parameter = name;
  res.rule = rule;
  res.grid = grid;
  res.value.assign(grid.size(), kNaN);
  res.ok.assign(grid.size(), 0);
  parallel_for(static_cast<int>(grid.size()), threads, [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    const CrossingTime ct = time_to_alignment(make_params(grid[k]), rule, cfg);
    res.value[k] = ct.time;
    res.ok[k] = ct.reached ? 1 : 0;
  });
  return res;
}

}  // namespace

SweepResult noise_sweep(Rule rule, const std::vector<double>& sigmas,
                        const AlignmentTimeConfig& cfg, int threads) {
  return time_sweep(rule, sigmas, "sigma", cfg, threads, [&](double s) {
    return IsotropicTaskParams::canonical(cfg.dim, s);
  });
}

SweepResult anisotropy_sweep(Rule rule, const std::vector<double>& epsilons, double sigma,
                             const AlignmentTimeConfig& cfg, int threads) {
  for (double e : epsilons) {
    if (!(e > -1.0 && e < 1.0)) throw ConfigError("anisotropy_sweep: epsilon must lie in (-1, 1)");
  }
  return time_sweep(rule, epsilons, "epsilon", cfg, threads, [&](double e) {
    return IsotropicTaskParams::canonical(cfg.dim, sigma, e);
  });
}

double anisotropy_slope(Rule rule, double sigma, double h, const AlignmentTimeConfig& cfg) {
  if (!(h > 0.0 && h < 1.0)) throw ConfigError("anisotropy_slope: step must lie in (0, 1)");
  const CrossingTime up = time_to_alignment(IsotropicTaskParams::canonical(cfg.dim, sigma, h),
                                            rule, cfg);
  const CrossingTime down = time_to_alignment(
      IsotropicTaskParams::canonical(cfg.dim, sigma, -h), rule, cfg);
  if (!up.reached || !down.reached) {
    throw NumericalError("anisotropy_slope: threshold not reached");
  }
  return (up.time - down.time) / (2.0 * h);
}

void CovDecayConfig::validate() const {
  if (dim < 1) throw ConfigError("cov-decay: dim must be >= 1");
  if (!(lambda > 0.0)) throw ConfigError("cov-decay: lambda must be positive");
  if (!(cov0_scale > 0.0)) throw ConfigError("cov-decay: initial covariance must be non-zero");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw ConfigError("cov-decay: tail_fraction must lie in (0, 1]");
  }
  flow.validate();
}

DecayFit fit_trace_decay(const Trajectory& traj, double tail_fraction) {
  constexpr double kUnderflow = 1e-280;
  std::size_t end = 0;
  while (end < traj.points.size()) {
    const double v = traj.points[end].tr_cov;
    if (!std::isfinite(v) || !(v > kUnderflow)) break;
    ++end;
  }
  if (end < 3) throw NumericalError("cov-decay: too few points before tr Cov vanishes");
  const double t0 = traj.points.front().t;
  const double t1 = traj.points[end - 1].t;
  const double start = t1 - tail_fraction * (t1 - t0);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < end; ++i) {
    if (traj.points[i].t + 1e-12 >= start) {
      x.push_back(traj.points[i].t);
      y.push_back(traj.points[i].tr_cov);
    }
  }
  if (x.size() < 3) throw NumericalError("cov-decay: fit window holds fewer than three points");
  return fit_exponential(x, y);
}

DecayFit covariance_decay_rate(const TaskSpec& task, const RuleConfig& rule,
                               const WeightState& state0, const CovDecayConfig& cfg) {
  cfg.validate();
  const Trajectory traj = integrate_cov_flow(task, rule, state0, cfg.flow);
  if (traj.status != FlowStatus::kOk) throw NumericalError("cov-decay: flow diverged");
  return fit_trace_decay(traj, cfg.tail_fraction);
}

SweepResult covariance_decay(Rule rule, const std::vector<double>& sigmas,
                             const CovDecayConfig& cfg, int threads) {
  require_increasing(sigmas, "cov-decay");
  cfg.validate();
  SweepResult res;
  res.parameter = "sigma";
  res.rule = rule;
  res.grid = sigmas;
  res.value.assign(sigmas.size(), kNaN);
  res.ok.assign(sigmas.size(), 0);
  const WeightState state0{Vector::Zero(cfg.dim), cfg.cov0_scale * Matrix::Identity(cfg.dim, cfg.dim),
                           0.0};
  parallel_for(static_cast<int>(sigmas.size()), threads, [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    const TaskSpec task = IsotropicTaskParams::canonical(cfg.dim, sigmas[k]).to_task();
    try {
      res.value[k] = covariance_decay_rate(
          task, RuleConfig{rule, cfg.lambda, Activation::kErfSigmoid}, state0, cfg).rate;
      res.ok[k] = 1;
    } catch (const NumericalError&) {
    }
  });
  return res;
}

FixedPointCurve fixed_point_curve(Rule rule, double sigma, const std::vector<double>& lambdas) {
  require_increasing(lambdas, "fixed-point curve");
  FixedPointCurve curve;
  curve.lambda = lambdas;
  std::vector<double> x, y;
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw ConfigError("fixed-point curve: lambda must be positive");
    const FixedPoint fp = find_fixed_point(IsotropicTaskParams::canonical(1, sigma), rule, lambda);
    curve.norm.push_back(fp.norm);
    if (fp.status != FlowStatus::kOk || !std::isfinite(fp.norm)) {
      curve.all_finite = false;
      continue;
    }
    x.push_back(std::log(lambda));
    y.push_back(fp.norm);
  }
  if (x.size() >= 2) {
    curve.fit = linear_fit(x, y);
  } else {
    curve.fit = {kNaN, kNaN, kNaN, x.size()};
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Forgetting

void ForgettingConfig::validate() const {
  if (dim < 2) throw ConfigError("forget: dim must be >= 2");
  if (num_tasks < 2) throw ConfigError("forget: num_tasks must be >= 2");
  if (!(sigma >= 0.0)) throw ConfigError("forget: sigma must be >= 0");
  if (!(lambda >= 0.0)) throw ConfigError("forget: lambda must be >= 0");
  if (!(eta > 0.0)) throw ConfigError("forget: eta must be positive");
  if (!(threshold > -1.0 && threshold < 1.0)) {
    throw ConfigError("forget: threshold must lie in (-1, 1)");
  }
  if (runs < 1) throw ConfigError("forget: runs must be >= 1");
  if (repetitions < 1) throw ConfigError("forget: repetitions must be >= 1");
  if (max_steps_per_task < 1) throw ConfigError("forget: max_steps_per_task must be >= 1");
  if (!(init_scale >= 0.0)) throw ConfigError("forget: init_scale must be >= 0");
  if (threads < 1) throw ConfigError("forget: threads must be >= 1");
  if (bootstrap < 0) throw ConfigError("forget: bootstrap must be >= 0");
  if (baseline.mode == BaselineMode::kEma &&
      !(baseline.ema_decay > 0.0 && baseline.ema_decay < 1.0)) {
    throw ConfigError("forget: ema_decay must lie in (0, 1)");
  }
}

DecayFit fit_forgetting_curve(const std::vector<double>& curve, const std::vector<double>& se,
                              double noise_floor_z) {
  std::vector<double> x, y;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const double floor = k < se.size() ? noise_floor_z * se[k] : 0.0;
    if (!(curve[k] > 0.0) || !(curve[k] > floor)) break;
    x.push_back(static_cast<double>(k));
    y.push_back(curve[k]);
  }
  if (x.size() < 2) return {kNaN, kNaN, kNaN, x.size()};
  return fit_exponential(x, y);
}

namespace {

Matrix random_unit_rows(Rng& rng, int rows, Index dim) {
  std::normal_distribution<double> normal;
  Matrix m(rows, dim);
  for (int k = 0; k < rows; ++k) {
    for (Index j = 0; j < dim; ++j) m(k, j) = normal(rng);
    m.row(k).normalize();
  }
  return m;
}

void summarize(ForgettingResult& res, const ForgettingConfig& cfg) {
  const std::size_t reps = res.per_repetition.size();
  const auto tasks = static_cast<std::size_t>(cfg.num_tasks);
  const auto mean_se = [&](const std::vector<std::size_t>& pick, std::vector<double>& mean,
                           std::vector<double>& se) {
    mean.assign(tasks, 0.0);
    se.assign(tasks, 0.0);
    const double n = static_cast<double>(pick.size());
    for (std::size_t k = 0; k < tasks; ++k) {
      double s = 0.0;
      for (std::size_t r : pick) s += res.per_repetition[r][k];
      mean[k] = s / n;
      if (pick.size() > 1) {
        double ss = 0.0;
        for (std::size_t r : pick) {
          const double d = res.per_repetition[r][k] - mean[k];
          ss += d * d;
        }
        se[k] = std::sqrt(ss / (n - 1.0) / n);
      }
    }
  };

  std::vector<std::size_t> all(reps);
  for (std::size_t r = 0; r < reps; ++r) all[r] = r;
  mean_se(all, res.curve, res.curve_se);
  res.fit = fit_forgetting_curve(res.curve, res.curve_se, cfg.noise_floor_z);
  res.ci_low = res.ci_high = res.fit.rate;
  if (reps < 2 || cfg.bootstrap == 0) return;

  Rng rng = make_stream(cfg.seed, 0x5eed0b0075ULL);
  std::uniform_int_distribution<std::size_t> pick_rep(0, reps - 1);
  std::vector<double> rates;
  std::vector<std::size_t> pick(reps);
  std::vector<double> mean, se;
  for (int b = 0; b < cfg.bootstrap; ++b) {
    for (std::size_t& p : pick) p = pick_rep(rng);
    mean_se(pick, mean, se);
    const DecayFit f = fit_forgetting_curve(mean, se, cfg.noise_floor_z);
    if (std::isfinite(f.rate)) rates.push_back(f.rate);
  }
  if (rates.size() < 2) return;
  std::sort(rates.begin(), rates.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(rates.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, rates.size() - 1);
    return rates[lo] + (pos - static_cast<double>(lo)) * (rates[hi] - rates[lo]);
  };
  res.ci_low = quantile(0.025);
  res.ci_high = quantile(0.975);
}

}  // namespace

ForgettingResult forgetting_run(const ForgettingConfig& cfg) {
  cfg.validate();
  ForgettingResult res;
  const auto reps = static_cast<std::size_t>(cfg.repetitions);
  const auto tasks = static_cast<std::size_t>(cfg.num_tasks);
  res.per_repetition.assign(reps, std::vector<double>(tasks, 0.0));
  res.steps.assign(reps, std::vector<long>(tasks, 0));
  const bool reinforce = cfg.rule == Rule::kReinforce;

  parallel_for(cfg.repetitions, cfg.threads, [&](int rep) {
    const auto r_idx = static_cast<std::size_t>(rep);
    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(rep));
    const Matrix mus = random_unit_rows(rng, cfg.num_tasks, cfg.dim);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double init_sd = cfg.init_scale / std::sqrt(static_cast<double>(cfg.dim));
    std::vector<Vector> ws(static_cast<std::size_t>(cfg.runs), Vector(cfg.dim));
    for (Vector& w : ws) {
      for (Index j = 0; j < cfg.dim; ++j) w(j) = init_sd * normal(rng);
    }
    std::vector<double> baselines(ws.size(), 0.0);
    const Vector mu0 = mus.row(0).transpose();
    Vector x(cfg.dim);
    const auto ensemble_mean = [&] {
      Vector m = Vector::Zero(cfg.dim);
      for (const Vector& w : ws) m += w;
      return Vector(m / static_cast<double>(ws.size()));
    };

    for (int k = 0; k < cfg.num_tasks; ++k) {
      const Vector mu = mus.row(k).transpose();
      const TaskSpec task = IsotropicTaskParams{mu, cfg.sigma, 0.0}.to_task();
      TaskSampler sampler(task);
      Vector mean = ensemble_mean();
      long n = 0;
      while (alignment(mean, mu) < cfg.threshold) {
        if (n >= cfg.max_steps_per_task) {
          throw NumericalError("forget: task " + std::to_string(k) +
                               " did not reach the alignment threshold within " +
                               std::to_string(cfg.max_steps_per_task) + " steps (repetition " +
                               std::to_string(rep) + ")");
        }
        for (std::size_t r = 0; r < ws.size(); ++r) {
          Vector& w = ws[r];
          const int y = sampler.draw(rng, x);
          if (!reinforce) {
            sl_update(w, x, y, cfg.eta, cfg.lambda, cfg.activation);
            continue;
          }
          const int y_hat = uniform(rng) < activate(cfg.activation, w.dot(x)) ? 1 : -1;
          double b = 0.0;
          if (cfg.baseline.mode == BaselineMode::kEma) b = baselines[r];
          if (cfg.baseline.mode == BaselineMode::kAnalytic) b = analytic_reward_baseline(task, w);
          const double reward = rl_update(w, x, y, y_hat, b, cfg.eta, cfg.lambda, cfg.activation);
          if (cfg.baseline.mode == BaselineMode::kEma) {
            baselines[r] = cfg.baseline.ema_decay * baselines[r] +
                           (1.0 - cfg.baseline.ema_decay) * reward;
          }
        }
        ++n;
        mean = ensemble_mean();
        if (!mean.allFinite()) throw NumericalError("forget: weights became non-finite");
      }
      res.steps[r_idx][static_cast<std::size_t>(k)] = n;
      res.per_repetition[r_idx][static_cast<std::size_t>(k)] = alignment(mean, mu0);
    }
  });
  summarize(res, cfg);
  return res;
}

ForgettingResult forgetting_flow(const ForgettingConfig& cfg, double dt) {
  cfg.validate();
  if (!(dt > 0.0)) throw ConfigError("forget: dt must be positive");
  ForgettingResult res;
  const auto reps = static_cast<std::size_t>(cfg.repetitions);
  const auto tasks = static_cast<std::size_t>(cfg.num_tasks);
  res.per_repetition.assign(reps, std::vector<double>(tasks, 0.0));
  res.steps.assign(reps, std::vector<long>(tasks, 0));
  const double t_budget = static_cast<double>(cfg.max_steps_per_task) * cfg.eta;

  parallel_for(cfg.repetitions, cfg.threads, [&](int rep) {
    const auto r_idx = static_cast<std::size_t>(rep);
    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(rep));
    const Matrix mus = random_unit_rows(rng, cfg.num_tasks, cfg.dim);
    const Vector mu0 = mus.row(0).transpose();
    Vector w = Vector::Zero(cfg.dim);
    for (int k = 0; k < cfg.num_tasks; ++k) {
      const Vector mu = mus.row(k).transpose();
      const TaskSpec task = IsotropicTaskParams{mu, cfg.sigma, 0.0}.to_task();
      const DriftField f = make_drift_field(task, RuleConfig{cfg.rule, cfg.lambda});
      double t = 0.0;
      while (alignment(w, mu) < cfg.threshold) {
        if (t > t_budget) {
          throw NumericalError("forget: task " + std::to_string(k) +
                               " did not reach the alignment threshold in the flow");
        }
        const Vector k1 = f(w);
        const Vector k2 = f(w + 0.5 * dt * k1);
        const Vector k3 = f(w + 0.5 * dt * k2);
        const Vector k4 = f(w + dt * k3);
        w += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += dt;
      }
      res.steps[r_idx][static_cast<std::size_t>(k)] = std::lround(t / cfg.eta);
      res.per_repetition[r_idx][static_cast<std::size_t>(k)] = alignment(w, mu0);
    }
  });
  summarize(res, cfg);
  return res;
}

}  // namespace pflow
