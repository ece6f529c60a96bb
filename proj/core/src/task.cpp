#include "pflow/task.hpp"

#include <cmath>
#include <string>

#include "pflow/specfun.hpp"

namespace pflow {

std::string_view to_string(Rule rule) {
  return rule == Rule::kSupervised ? "sl" : "rl";
}

std::string_view to_string(Activation activation) {
  return activation == Activation::kErfSigmoid ? "erf" : "logistic";
}

Rule parse_rule(std::string_view name) {
  if (name == "sl" || name == "SL") return Rule::kSupervised;
  if (name == "rl" || name == "RL") return Rule::kReinforce;
  throw ConfigError("unknown rule '" + std::string(name) + "' (expected sl or rl)");
}

Activation parse_activation(std::string_view name) {
  if (name == "erf") return Activation::kErfSigmoid;
  if (name == "logistic") return Activation::kLogistic;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected erf or logistic)");
}

// ---------------------------------------------------------------------------
// Covariance

Covariance Covariance::dense(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw ConfigError("covariance must be a non-empty square matrix");
  }
  if (!sigma.allFinite()) throw ConfigError("covariance has non-finite entries");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw ConfigError("covariance is not symmetric");
  }
  const Matrix sym = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw ConfigError("covariance eigendecomposition failed");
  Vector lambda = eig.eigenvalues();
  if (lambda.minCoeff() < kPsdTolerance) {
    throw ConfigError("covariance is not positive semidefinite (min eigenvalue " +
                      std::to_string(lambda.minCoeff()) + ")");
  }
  const bool clipped = lambda.minCoeff() < 0.0;
  lambda = lambda.cwiseMax(0.0);

  auto data = std::make_shared<DenseData>();
  const Matrix& v = eig.eigenvectors();
  data->factor = v * lambda.cwiseSqrt().asDiagonal();
  data->sigma = clipped ? Matrix(v * lambda.asDiagonal() * v.transpose()) : sym;
  if (clipped) data->sigma = 0.5 * (data->sigma + data->sigma.transpose()).eval();

  Covariance c;
  c.dim_ = sigma.rows();
  c.dense_ = std::move(data);
  return c;
}

Covariance Covariance::isotropic(Index dim, double variance) {
  if (dim <= 0) throw ConfigError("covariance dimension must be positive");
  Vector e = Vector::Zero(dim);
  e(0) = 1.0;
  return spiked(e, variance, variance);
}

Covariance Covariance::spiked(const Vector& direction, double parallel_variance,
                              double orthogonal_variance) {
  if (direction.size() == 0) throw ConfigError("covariance dimension must be positive");
  if (!(parallel_variance >= 0.0) || !(orthogonal_variance >= 0.0) ||
      !std::isfinite(parallel_variance) || !std::isfinite(orthogonal_variance)) {
    throw ConfigError("variances must be finite and non-negative");
  }
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("spike direction must be non-zero");
  Covariance c;
  c.dim_ = direction.size();
  c.direction_ = direction / n;
  c.parallel_ = parallel_variance;
  c.orthogonal_ = orthogonal_variance;
  return c;
}

Vector Covariance::apply(const Vector& w) const {
  if (dense_) return dense_->sigma * w;
  return orthogonal_ * w + (parallel_ - orthogonal_) * direction_.dot(w) * direction_;
}

double Covariance::quadratic(const Vector& w) const {
  if (dense_) return std::max(0.0, w.dot(dense_->sigma * w));
  const double p = direction_.dot(w);
  return std::max(0.0, orthogonal_ * (w.squaredNorm() - p * p) + parallel_ * p * p);
}

double Covariance::trace() const {
  if (dense_) return dense_->sigma.trace();
  return parallel_ + orthogonal_ * static_cast<double>(dim_ - 1);
}

Matrix Covariance::matrix() const {
  if (dense_) return dense_->sigma;
  Matrix m = orthogonal_ * Matrix::Identity(dim_, dim_);
  m.noalias() += (parallel_ - orthogonal_) * direction_ * direction_.transpose();
  return m;
}

void Covariance::transform_noise(const Vector& z, Vector& out) const {
  if (dense_) {
    out.noalias() = dense_->factor * z;
    return;
  }
  const double so = std::sqrt(orthogonal_);
  const double sp = std::sqrt(parallel_);
  out = so * z;
  out += (sp - so) * direction_.dot(z) * direction_;
}

// ---------------------------------------------------------------------------
// TaskSpec

TaskSpec::TaskSpec(Vector mu_pos, Vector mu_neg, Covariance sigma_pos, Covariance sigma_neg)
    : mu_pos_(std::move(mu_pos)),
      mu_neg_(std::move(mu_neg)),
      sigma_pos_(std::move(sigma_pos)),
      sigma_neg_(std::move(sigma_neg)) {
  const Index n = mu_pos_.size();
  if (n == 0) throw ConfigError("task dimension must be positive");
  if (mu_neg_.size() != n || sigma_pos_.dim() != n || sigma_neg_.dim() != n) {
    throw ConfigError("task means and covariances must share one dimension");
  }
  if (!mu_pos_.allFinite() || !mu_neg_.allFinite()) {
    throw ConfigError("task means must be finite");
  }
}

IsotropicTaskParams IsotropicTaskParams::canonical(Index dim, double sigma, double epsilon) {
  if (dim <= 0) throw ConfigError("dimension must be positive");
  IsotropicTaskParams p;
  p.mu = Vector::Zero(dim);
  p.mu(0) = 1.0;
  p.sigma = sigma;
  p.epsilon = epsilon;
  return p;
}

TaskSpec IsotropicTaskParams::to_task() const {
  const Index n = mu.size();
  if (n == 0) throw ConfigError("mean vector must be non-empty");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be >= 0");
  if (!(epsilon >= -1.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [-1, 1]");
  if (epsilon != 0.0 && n < 2) throw ConfigError("anisotropy needs dimension >= 2");
  if (!(mu.norm() > 0.0)) throw ConfigError("mean vector must be non-zero");
  const double s2 = sigma * sigma;
  const double par = s2 * (1.0 + epsilon);
  const double orth = n > 1 ? s2 * (1.0 - epsilon / static_cast<double>(n - 1)) : s2;
  Covariance cov = Covariance::spiked(mu, par, orth);
  return TaskSpec(mu, -mu, cov, cov);
}

// ---------------------------------------------------------------------------
// Sampling

TaskSampler::TaskSampler(const TaskSpec& task)
    : task_(task), z_(task.dim()), noise_(task.dim()) {}

void TaskSampler::draw_given(Rng& rng, int label, Vector& x) {
  for (Index i = 0; i < z_.size(); ++i) z_(i) = normal_(rng);
  task_.covariance(label).transform_noise(z_, noise_);
  x = task_.mean(label) + noise_;
}

int TaskSampler::draw(Rng& rng, Vector& x) {
  const int label = (rng() >> 63) != 0 ? 1 : -1;
  draw_given(rng, label, x);
  return label;
}

std::vector<Sample> sample(const TaskSpec& task, std::uint64_t seed, std::size_t count) {
  if (count == 0) throw ConfigError("sample count must be >= 1");
  Rng rng = make_stream(seed, 0);
  TaskSampler sampler(task);
  std::vector<Sample> out(count);
  for (auto& s : out) s.y = sampler.draw(rng, s.x);
  return out;
}

// ---------------------------------------------------------------------------
// Accuracy

namespace {

// Probability that sign * (w . x) > 0 for x ~ N(mu, cov).
double half_space_probability(const Vector& mu, const Covariance& cov, const Vector& w,
                              double sign) {
  const double m = sign * mu.dot(w);
  const double s = std::sqrt(cov.quadratic(w));
  if (s == 0.0) {
    if (m == 0.0) throw NumericalError("model_accuracy: decision undefined for degenerate class");
    return m > 0.0 ? 1.0 : 0.0;
  }
  return specfun::normal_cdf(m / s);
}

}  // namespace

double model_accuracy(const TaskSpec& task, const Vector& w) {
  if (w.size() != task.dim()) throw ConfigError("weight dimension does not match task");
  if (!w.allFinite()) throw ConfigError("weights must be finite");
  if (w.isZero(0.0)) throw NumericalError("model_accuracy: zero weight vector");
  return 0.5 * half_space_probability(task.mu_pos(), task.sigma_pos(), w, 1.0) +
         0.5 * half_space_probability(task.mu_neg(), task.sigma_neg(), w, -1.0);
}

}  // namespace pflow
