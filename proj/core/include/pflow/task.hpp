#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pflow/common.hpp"

namespace pflow {

/// Symmetric positive semidefinite class covariance.
///
/// Two representations are kept: a dense matrix (validated and clipped by a
/// symmetric eigendecomposition) and a "spiked" form
///   Sigma = orth * I + (par - orth) * u u^T,  |u| = 1,
/// which covers isotropic and anisotropic synthetic tasks at O(N) cost per
/// product. Every drift evaluation only needs Sigma w and w^T Sigma w.
class Covariance {
 public:
  /// Minimum eigenvalue accepted before clipping.
  static constexpr double kPsdTolerance = -1e-10;

  /// Throws ConfigError if `sigma` is not square, not symmetric, or has an
  /// eigenvalue below kPsdTolerance. Eigenvalues in [kPsdTolerance, 0) are clipped to 0.
  static Covariance dense(const Matrix& sigma);
  static Covariance isotropic(Index dim, double variance);
  static Covariance spiked(const Vector& direction, double parallel_variance,
                           double orthogonal_variance);

  Index dim() const noexcept { return dim_; }
  bool is_dense() const noexcept { return dense_ != nullptr; }

  // Spiked-form parameters; meaningful only when !is_dense().
  const Vector& spike_direction() const noexcept { return direction_; }
  double parallel_variance() const noexcept { return parallel_; }
  double orthogonal_variance() const noexcept { return orthogonal_; }

  /// Sigma * w.
  Vector apply(const Vector& w) const;
  /// w^T Sigma w (never negative).
  double quadratic(const Vector& w) const;
  double trace() const;
  Matrix matrix() const;

  /// out = Sigma^{1/2} z for a standard normal vector z.
  void transform_noise(const Vector& z, Vector& out) const;

 private:
  struct DenseData {
    Matrix sigma;
    Matrix factor;  // V * sqrt(Lambda)
  };

  Covariance() = default;

  Index dim_ = 0;
  std::shared_ptr<const DenseData> dense_;
  Vector direction_;
  double parallel_ = 0.0;
  double orthogonal_ = 0.0;
};

/// Binary Gaussian classification task with fixed class prior 1/2.
/// Label +1 draws x ~ N(mu_pos, sigma_pos), label -1 draws x ~ N(mu_neg, sigma_neg).
class TaskSpec {
 public:
  TaskSpec(Vector mu_pos, Vector mu_neg, Covariance sigma_pos, Covariance sigma_neg);

  Index dim() const noexcept { return mu_pos_.size(); }
  const Vector& mu_pos() const noexcept { return mu_pos_; }
  const Vector& mu_neg() const noexcept { return mu_neg_; }
  const Covariance& sigma_pos() const noexcept { return sigma_pos_; }
  const Covariance& sigma_neg() const noexcept { return sigma_neg_; }
  const Vector& mean(int label) const noexcept { return label > 0 ? mu_pos_ : mu_neg_; }
  const Covariance& covariance(int label) const noexcept {
    return label > 0 ? sigma_pos_ : sigma_neg_;
  }

 private:
  Vector mu_pos_;
  Vector mu_neg_;
  Covariance sigma_pos_;
  Covariance sigma_neg_;
};

/// Symmetric task mu_pm = +-mu with noise sigma^2 split between the mean
/// direction and its orthogonal complement:
///   variance along mu          sigma^2 (1 + epsilon)
///   variance per orthogonal axis sigma^2 (1 - epsilon / (N - 1))
/// so the total variance N sigma^2 does not depend on epsilon.
struct IsotropicTaskParams {
  Vector mu;
  double sigma = 1.0;
  double epsilon = 0.0;

  /// mu = e_1 in `dim` dimensions.
  static IsotropicTaskParams canonical(Index dim, double sigma, double epsilon = 0.0);

  TaskSpec to_task() const;
};

struct Sample {
  Vector x;
  int y = 1;
};

/// Draws labelled inputs for one task. Each call to draw() consumes one
/// label and dim() standard normals from the engine.
class TaskSampler {
 public:
  explicit TaskSampler(const TaskSpec& task);

  /// Writes the input into `x` (resized as needed) and returns the label.
  int draw(Rng& rng, Vector& x);
  /// Same as draw() with the label fixed by the caller.
  void draw_given(Rng& rng, int label, Vector& x);

 private:
  TaskSpec task_;
  std::normal_distribution<double> normal_;
  Vector z_;
  Vector noise_;
};

/// `count` i.i.d. samples; identical seeds give identical sequences.
std::vector<Sample> sample(const TaskSpec& task, std::uint64_t seed, std::size_t count);

/// Probability that sign(w . x) equals the label under the Gaussian model:
///   1/2 Phi(mu+ . w / sqrt(w^T S+ w)) + 1/2 Phi(-mu- . w / sqrt(w^T S- w)).
/// A class with w^T S w = 0 contributes 0 or 1 depending on the sign of mu . w;
/// throws NumericalError when additionally mu . w = 0 (the decision is undefined).
double model_accuracy(const TaskSpec& task, const Vector& w);

/// JSON form: {"dim", "mu_pos", "mu_neg", "sigma_pos", "sigma_neg"} with full
/// matrices, or the shorthand {"dim", "mu"?, "sigma", "epsilon"?}.
std::string task_to_json(const TaskSpec& task);
TaskSpec task_from_json(std::string_view text);

}  // namespace pflow
