#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pflow/common.hpp"
#include "pflow/gabor.hpp"
#include "pflow/idx.hpp"
#include "pflow/task.hpp"

namespace pflow {

/// Per-class Gaussian model of a two-class dataset after a global shift that
/// makes the pooled mean zero. Class 1 is the positive label.
struct GaussianFit {
  Vector mu0;
  Vector mu1;
  Matrix sigma0;
  Matrix sigma1;
  Vector global_shift;  ///< subtracted from every input
  std::size_t n0 = 0;
  std::size_t n1 = 0;

  TaskSpec to_task() const;
};

/// `features` holds one sample per column, `labels` are 0 or 1. Covariances
/// are unbiased; each class needs at least two samples.
GaussianFit fit_gaussians(const Matrix& features, const std::vector<int>& labels);

Matrix apply_shift(const Matrix& features, const Vector& shift);

struct CurveConfig {
  double lambda = 1.0;
  double eta = 1e-3;
  long steps = 12665;
  int checkpoints = 50;
  /// Integrator step of the theory curve, in units of eta * steps.
  double dt = 0.01;
  int repeats = 10;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

/// Evenly spaced step counts 0 = s_0 < ... < s_checkpoints = steps.
std::vector<long> checkpoint_steps(long steps, int checkpoints);

struct LearningCurve {
  std::vector<long> steps;
  std::vector<double> t;  ///< eta * steps
  std::vector<double> accuracy;
  std::vector<double> accuracy_sd;
  std::vector<double> alignment;
  std::vector<double> alignment_sd;
};

/// Mean flow of cross-entropy SGD on the Gaussian model of `fit`, from w = 0.
/// Accuracy is model_accuracy; alignment is the cosine with `reference`.
LearningCurve theory_curve(const TaskSpec& task, const Vector& reference, const CurveConfig& cfg);
LearningCurve theory_curve(const GaussianFit& fit, const CurveConfig& cfg);

/// Fraction of columns of `x` classified correctly by sign(w . x); digit 1 is
/// positive. A zero score counts as half correct.
double empirical_accuracy(const Matrix& x, const std::vector<int>& labels, const Vector& w);

/// Online logistic SGD from w = 0 over reshuffled epochs, repeated with
/// independent shuffles. Accuracy is measured on the test set.
LearningCurve empirical_curve(const Matrix& train, const std::vector<int>& train_labels,
                              const Matrix& test, const std::vector<int>& test_labels,
                              const Vector& reference, const CurveConfig& cfg);

/// Shifted features for both splits plus the Gaussian fit of the training split.
struct PreparedMnist {
  Matrix train;
  std::vector<int> train_labels;
  Matrix test;
  std::vector<int> test_labels;
  GaussianFit fit;
};

struct MnistData {
  Dataset train;
  Dataset test;
};

/// `flag` if non-empty, else $PFLOW_MNIST_DIR, else data/mnist.
std::string mnist_data_dir(const std::string& flag = "");

/// Reads the four canonical IDX files from `dir`, keeping digits 0 and 1.
MnistData load_mnist(const std::string& dir);

/// `gabor == nullptr` keeps raw pixels.
PreparedMnist prepare_mnist(const MnistData& data, const GaborBankConfig* gabor, int threads = 1);

/// Direction of change of `y` across each of `segments` equal index ranges:
/// +1, -1, or 0 when the change is at most `flat_tolerance` in magnitude.
std::vector<int> segment_trends(const std::vector<double>& y, int segments,
                                double flat_tolerance);

}  // namespace pflow
