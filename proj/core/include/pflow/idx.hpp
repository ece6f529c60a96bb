#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pflow/common.hpp"

namespace pflow {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  ///< count * rows * cols, row-major per image
};

// Parsers throw FormatError carrying the byte offset of the first bad byte.
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

IdxImages read_idx_images(const std::string& path);
std::vector<std::uint8_t> read_idx_labels(const std::string& path);

void write_idx_images(const std::string& path, const IdxImages& images);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

/// Images as columns of a (rows * cols) x count matrix scaled to [0, 1].
struct Dataset {
  Matrix x;
  std::vector<int> labels;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return labels.size(); }
};

/// Reads an image/label pair, keeping only digits 0 and 1.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Same selection applied to parsed data.
Dataset binary_subset(const IdxImages& images, const std::vector<std::uint8_t>& labels);

}  // namespace pflow
