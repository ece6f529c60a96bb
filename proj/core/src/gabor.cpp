#include "pflow/gabor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pflow/parallel.hpp"

namespace pflow {

void GaborBankConfig::validate(std::size_t rows, std::size_t cols) const {
  if (scales < 1 || orientations < 1 || grid < 1) {
    throw ConfigError("gabor: scales, orientations and grid must be >= 1");
  }
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw ConfigError("gabor: kernel_size must be a positive odd number");
  }
  if (!(fmax > 0.0 && fmax <= 0.5)) throw ConfigError("gabor: fmax must lie in (0, 0.5]");
  if (!(gamma > 0.0) || !(eta > 0.0)) throw ConfigError("gabor: gamma and eta must be positive");
  if (num_filters != feature_count()) {
    throw ConfigError("gabor: num_filters " + std::to_string(num_filters) +
                      " is inconsistent with scales * orientations * grid^2 = " +
                      std::to_string(feature_count()));
  }
  if (rows == 0 || rows != cols) throw ConfigError("gabor: images must be square");
  if (static_cast<std::size_t>(grid) > rows) {
    throw ConfigError("gabor: sampling grid is finer than the image");
  }
}

GaborBank::GaborBank(const GaborBankConfig& cfg, std::size_t rows, std::size_t cols)
    : cfg_(cfg), rows_(rows), cols_(cols) {
  cfg.validate(rows, cols);
  const Index features = cfg.feature_count();
  const auto pixels = static_cast<Index>(rows * cols);
  real_ = Matrix::Zero(features, pixels);
  imag_ = Matrix::Zero(features, pixels);
  const int half = cfg.kernel_size / 2;
  const int cells = cfg.grid * cfg.grid;
  std::vector<int> centres(static_cast<std::size_t>(cfg.grid));
  for (int i = 0; i < cfg.grid; ++i) {
    centres[static_cast<std::size_t>(i)] =
        static_cast<int>((i + 0.5) * static_cast<double>(rows) / cfg.grid);
  }
  for (int s = 0; s < cfg.scales; ++s) {
    const double f = cfg.fmax / std::pow(std::numbers::sqrt2, s);
    const double norm = f * f / (std::numbers::pi * cfg.gamma * cfg.eta);
    for (int o = 0; o < cfg.orientations; ++o) {
      const double theta = o * std::numbers::pi / cfg.orientations;
      const double c = std::cos(theta);
      const double sn = std::sin(theta);
      for (int cell = 0; cell < cells; ++cell) {
        const Index row = (static_cast<Index>(s) * cfg.orientations + o) * cells + cell;
        const int cy = centres[static_cast<std::size_t>(cell / cfg.grid)];
        const int cx = centres[static_cast<std::size_t>(cell % cfg.grid)];
        for (int dy = -half; dy <= half; ++dy) {
          const int y = cy + dy;
          if (y < 0 || y >= static_cast<int>(rows)) continue;
          for (int dx = -half; dx <= half; ++dx) {
            const int x = cx + dx;
            if (x < 0 || x >= static_cast<int>(cols)) continue;
            const double xp = dx * c + dy * sn;
            const double yp = -dx * sn + dy * c;
            const double env = norm * std::exp(-(f * f * xp * xp / (cfg.gamma * cfg.gamma) +
                                                 f * f * yp * yp / (cfg.eta * cfg.eta)));
            const double phase = 2.0 * std::numbers::pi * f * xp;
            const Index px = static_cast<Index>(y) * static_cast<Index>(cols) + x;
            real_(row, px) = env * std::cos(phase);
            imag_(row, px) = env * std::sin(phase);
          }
        }
      }
    }
  }
}

int GaborBank::scale_of(Index feature) const {
  return static_cast<int>(feature / (cfg_.orientations * cfg_.grid * cfg_.grid));
}

int GaborBank::orientation_of(Index feature) const {
  return static_cast<int>(feature / (cfg_.grid * cfg_.grid)) % cfg_.orientations;
}

Matrix GaborBank::apply(const Matrix& images, int threads) const {
  if (images.rows() != real_.cols()) {
    throw ConfigError("gabor: image size does not match the filter bank");
  }
  constexpr Index kChunk = 1024;
  const Index n = images.cols();
  Matrix out(dim(), n);
  const int chunks = static_cast<int>((n + kChunk - 1) / kChunk);
  parallel_for(chunks, threads, [&](int c) {
    const Index begin = c * kChunk;
    const Index len = std::min(kChunk, n - begin);
    const Matrix re = real_ * images.middleCols(begin, len);
    const Matrix im = imag_ * images.middleCols(begin, len);
    out.middleCols(begin, len) = (re.array().square() + im.array().square()).sqrt().matrix();
  });
  return out;
}

Matrix gabor_features(const Matrix& images, std::size_t rows, std::size_t cols,
                      const GaborBankConfig& cfg, int threads) {
  return GaborBank(cfg, rows, cols).apply(images, threads);
}

}  // namespace pflow
