#include "pflow/mnist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "pflow/drift.hpp"
#include "pflow/flow.hpp"
#include "pflow/parallel.hpp"
#include "pflow/simulate.hpp"

namespace pflow {

TaskSpec GaussianFit::to_task() const {
  return TaskSpec(mu1, mu0, Covariance::dense(sigma1), Covariance::dense(sigma0));
}

Matrix apply_shift(const Matrix& features, const Vector& shift) {
  if (shift.size() != features.rows()) throw ConfigError("shift dimension mismatch");
  return features.colwise() - shift;
}

GaussianFit fit_gaussians(const Matrix& features, const std::vector<int>& labels) {
  if (static_cast<Index>(labels.size()) != features.cols()) {
    throw ConfigError("fit_gaussians: label count does not match the samples");
  }
  std::vector<Index> idx0, idx1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) {
      idx0.push_back(static_cast<Index>(i));
    } else if (labels[i] == 1) {
      idx1.push_back(static_cast<Index>(i));
    } else {
      throw ConfigError("fit_gaussians: labels must be 0 or 1");
    }
  }
  if (idx0.size() < 2 || idx1.size() < 2) {
    throw ConfigError("fit_gaussians: each class needs at least two samples");
  }
  GaussianFit fit;
  fit.global_shift = features.rowwise().mean();
  fit.n0 = idx0.size();
  fit.n1 = idx1.size();
  const auto moments = [&](const std::vector<Index>& idx, Vector& mu, Matrix& sigma) {
    Matrix x(features.rows(), static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      x.col(static_cast<Index>(k)) = features.col(idx[k]) - fit.global_shift;
    }
    mu = x.rowwise().mean();
    x.colwise() -= mu;
    sigma = Matrix::Zero(x.rows(), x.rows());
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(x);
    sigma = sigma.selfadjointView<Eigen::Lower>();
    sigma /= static_cast<double>(idx.size() - 1);
  };
  moments(idx0, fit.mu0, fit.sigma0);
  moments(idx1, fit.mu1, fit.sigma1);
  return fit;
}

void CurveConfig::validate() const {
  if (!(lambda >= 0.0)) throw ConfigError("mnist: lambda must be >= 0");
  if (!(eta >= 0.0)) throw ConfigError("mnist: eta must be >= 0");
  if (steps < 1) throw ConfigError("mnist: steps must be >= 1");
  if (checkpoints < 1) throw ConfigError("mnist: checkpoints must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("mnist: dt must be positive");
  if (repeats < 1) throw ConfigError("mnist: repeats must be >= 1");
  if (threads < 1) throw ConfigError("mnist: threads must be >= 1");
}

std::vector<long> checkpoint_steps(long steps, int checkpoints) {
  std::vector<long> out;
  for (int j = 0; j <= checkpoints; ++j) {
    const long s = static_cast<long>(std::llround(static_cast<double>(steps) * j / checkpoints));
    if (out.empty() || s > out.back()) out.push_back(s);
  }
  return out;
}

LearningCurve theory_curve(const TaskSpec& task, const Vector& reference, const CurveConfig& cfg) {
  cfg.validate();
  const DriftField field = make_drift_field(task, RuleConfig{Rule::kSupervised, cfg.lambda});
  LearningCurve curve;
  curve.steps = checkpoint_steps(cfg.steps, cfg.checkpoints);
  Vector w = Vector::Zero(task.dim());
  double t = 0.0;
  for (long s : curve.steps) {
    const double target = cfg.eta * static_cast<double>(s);
    const double span = target - t;
    if (span > 0.0) {
      const long n = static_cast<long>(std::ceil(span / cfg.dt - 1e-9));
      const double h = span / static_cast<double>(n);
      for (long k = 0; k < n; ++k) {
        const Vector k1 = field(w);
        const Vector k2 = field(w + 0.5 * h * k1);
        const Vector k3 = field(w + 0.5 * h * k2);
        const Vector k4 = field(w + h * k3);
        w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      if (!w.allFinite() || w.norm() > kDivergenceNorm) {
        throw NumericalError("mnist: theory flow diverged");
      }
    }
    t = target;
    curve.t.push_back(t);
    double acc = 0.5;
    if (!w.isZero(0.0)) acc = model_accuracy(task, w);
    curve.accuracy.push_back(acc);
    curve.accuracy_sd.push_back(0.0);
    curve.alignment.push_back(alignment(w, reference));
    curve.alignment_sd.push_back(0.0);
  }
  return curve;
}

LearningCurve theory_curve(const GaussianFit& fit, const CurveConfig& cfg) {
  return theory_curve(fit.to_task(), fit.mu1, cfg);
}

double empirical_accuracy(const Matrix& x, const std::vector<int>& labels, const Vector& w) {
  if (static_cast<Index>(labels.size()) != x.cols()) {
    throw ConfigError("accuracy: label count does not match the samples");
  }
  if (labels.empty()) throw ConfigError("accuracy: no samples");
  const Vector scores = x.transpose() * w;
  double correct = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double s = scores(static_cast<Index>(i));
    if (s == 0.0) {
      correct += 0.5;
    } else if ((s > 0.0) == (labels[i] == 1)) {
      correct += 1.0;
    }
  }
  return correct / static_cast<double>(labels.size());
}

LearningCurve empirical_curve(const Matrix& train, const std::vector<int>& train_labels,
                              const Matrix& test, const std::vector<int>& test_labels,
                              const Vector& reference, const CurveConfig& cfg) {
  cfg.validate();
  if (static_cast<Index>(train_labels.size()) != train.cols() || train.cols() == 0) {
    throw ConfigError("mnist: training labels do not match the samples");
  }
  if (test.rows() != train.rows() || reference.size() != train.rows()) {
    throw ConfigError("mnist: feature dimensions differ");
  }
  const std::vector<long> marks = checkpoint_steps(cfg.steps, cfg.checkpoints);
  const std::size_t m = marks.size();
  const auto reps = static_cast<std::size_t>(cfg.repeats);
  std::vector<std::vector<double>> acc(reps, std::vector<double>(m));
  std::vector<std::vector<double>> align(reps, std::vector<double>(m));

  parallel_for(cfg.repeats, cfg.threads, [&](int rep) {
    const auto r = static_cast<std::size_t>(rep);
    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(rep));
    std::vector<Index> order(static_cast<std::size_t>(train.cols()));
    std::iota(order.begin(), order.end(), Index{0});
    std::size_t pos = order.size();
    Vector w = Vector::Zero(train.rows());
    Vector x(train.rows());
    long step = 0;
    for (std::size_t j = 0; j < m; ++j) {
      for (; step < marks[j]; ++step) {
        if (pos == order.size()) {
          std::shuffle(order.begin(), order.end(), rng);
          pos = 0;
        }
        const Index i = order[pos++];
        x = train.col(i);
        sl_update(w, x, train_labels[static_cast<std::size_t>(i)] == 1 ? 1 : -1, cfg.eta,
                  cfg.lambda, Activation::kLogistic);
      }
      acc[r][j] = empirical_accuracy(test, test_labels, w);
      align[r][j] = alignment(w, reference);
    }
  });

  LearningCurve curve;
  curve.steps = marks;
  const auto stats = [&](const std::vector<std::vector<double>>& v, std::size_t j, double& mean,
                         double& sd) {
    mean = 0.0;
    for (std::size_t r = 0; r < reps; ++r) mean += v[r][j];
    mean /= static_cast<double>(reps);
    double ss = 0.0;
    for (std::size_t r = 0; r < reps; ++r) ss += (v[r][j] - mean) * (v[r][j] - mean);
    sd = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : 0.0;
  };
  for (std::size_t j = 0; j < m; ++j) {
    curve.t.push_back(cfg.eta * static_cast<double>(marks[j]));
    double mean = 0.0, sd = 0.0;
    stats(acc, j, mean, sd);
    curve.accuracy.push_back(mean);
    curve.accuracy_sd.push_back(sd);
    stats(align, j, mean, sd);
    curve.alignment.push_back(mean);
    curve.alignment_sd.push_back(sd);
  }
  return curve;
}

std::string mnist_data_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PFLOW_MNIST_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "data/mnist";
}

MnistData load_mnist(const std::string& dir) {
  MnistData data;
  data.train = load_idx(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte");
  data.test = load_idx(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte");
  return data;
}

PreparedMnist prepare_mnist(const MnistData& data, const GaborBankConfig* gabor, int threads) {
  PreparedMnist out;
  out.train_labels = data.train.labels;
  out.test_labels = data.test.labels;
  Matrix train, test;
  if (gabor != nullptr) {
    const GaborBank bank(*gabor, data.train.rows, data.train.cols);
    train = bank.apply(data.train.x, threads);
    test = bank.apply(data.test.x, threads);
  } else {
    train = data.train.x;
    test = data.test.x;
  }
  out.fit = fit_gaussians(train, out.train_labels);
  out.train = apply_shift(train, out.fit.global_shift);
  out.test = apply_shift(test, out.fit.global_shift);
  return out;
}

std::vector<int> segment_trends(const std::vector<double>& y, int segments,
                                double flat_tolerance) {
  if (segments < 1) throw ConfigError("segment_trends: segments must be >= 1");
  if (y.size() < static_cast<std::size_t>(segments) + 1) {
    throw ConfigError("segment_trends: too few points for the requested segments");
  }
  const double last = static_cast<double>(y.size() - 1);
  std::vector<int> out;
  for (int s = 0; s < segments; ++s) {
    const auto a = static_cast<std::size_t>(std::llround(last * s / segments));
    const auto b = static_cast<std::size_t>(std::llround(last * (s + 1) / segments));
    const double d = y[b] - y[a];
    out.push_back(std::abs(d) <= flat_tolerance ? 0 : (d > 0.0 ? 1 : -1));
  }
  return out;
}

}  // namespace pflow
