#pragma once

#include <cstddef>

#include "pflow/common.hpp"

namespace pflow {

/// Complex Gabor filters
///   g(x, y) = f^2 / (pi gamma eta) exp(-(f^2 x'^2 / gamma^2 + f^2 y'^2 / eta^2)) exp(2 pi i f x')
/// with f = fmax / sqrt(2)^scale and x' rotated by orientation * pi / orientations.
/// Each filter's response magnitude is sampled on a grid x grid lattice of
/// patch centres, giving scales * orientations * grid^2 features.
struct GaborBankConfig {
  int scales = 5;
  int orientations = 8;
  int grid = 6;
  int kernel_size = 39;
  double fmax = 0.25;
  double gamma = 1.4142135623730951;
  double eta = 1.4142135623730951;
  /// Expected feature count; must equal scales * orientations * grid^2.
  int num_filters = 1440;

  int feature_count() const { return scales * orientations * grid * grid; }
  /// Throws ConfigError when the bank is inconsistent or does not fit the image.
  void validate(std::size_t rows, std::size_t cols) const;
};

class GaborBank {
 public:
  GaborBank(const GaborBankConfig& cfg, std::size_t rows, std::size_t cols);

  Index dim() const { return real_.rows(); }
  int scale_of(Index feature) const;
  int orientation_of(Index feature) const;

  /// `images` holds one row-major image per column; returns one feature
  /// vector per column.
  Matrix apply(const Matrix& images, int threads = 1) const;

 private:
  GaborBankConfig cfg_;
  std::size_t rows_;
  std::size_t cols_;
  Matrix real_;
  Matrix imag_;
};

Matrix gabor_features(const Matrix& images, std::size_t rows, std::size_t cols,
                      const GaborBankConfig& cfg, int threads = 1);

}  // namespace pflow
