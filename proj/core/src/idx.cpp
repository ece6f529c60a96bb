#include "pflow/idx.hpp"

#include <fstream>
#include <iterator>

namespace pflow {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  if (bytes.size() < offset + 4) throw FormatError("idx: truncated header", bytes.size());
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  if (read_be32(bytes, 0) != kIdxImageMagic) throw FormatError("idx: bad image magic", 0);
  IdxImages img;
  img.count = read_be32(bytes, 4);
  img.rows = read_be32(bytes, 8);
  img.cols = read_be32(bytes, 12);
  const std::size_t per_image = img.rows * img.cols;
  if (per_image != 0 && img.count > bytes.size() / per_image) {
    throw FormatError("idx: truncated image data", bytes.size());
  }
  const std::size_t payload = img.count * per_image;
  if (bytes.size() < 16 + payload) throw FormatError("idx: truncated image data", bytes.size());
  if (bytes.size() > 16 + payload) throw FormatError("idx: trailing bytes", 16 + payload);
  img.pixels.assign(bytes.begin() + 16, bytes.end());
  return img;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  if (read_be32(bytes, 0) != kIdxLabelMagic) throw FormatError("idx: bad label magic", 0);
  const std::size_t count = read_be32(bytes, 4);
  if (bytes.size() < 8 + count) throw FormatError("idx: truncated label data", bytes.size());
  if (bytes.size() > 8 + count) throw FormatError("idx: trailing bytes", 8 + count);
  return {bytes.begin() + 8, bytes.end()};
}

IdxImages read_idx_images(const std::string& path) { return parse_idx_images(read_file(path)); }

std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
  return parse_idx_labels(read_file(path));
}

void write_idx_images(const std::string& path, const IdxImages& images) {
  if (images.pixels.size() != images.count * images.rows * images.cols) {
    throw ConfigError("idx: pixel buffer does not match the dimensions");
  }
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  put_be32(out, kIdxImageMagic);
  put_be32(out, static_cast<std::uint32_t>(images.count));
  put_be32(out, static_cast<std::uint32_t>(images.rows));
  put_be32(out, static_cast<std::uint32_t>(images.cols));
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  write_file(path, out);
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  put_be32(out, kIdxLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  write_file(path, out);
}

Dataset binary_subset(const IdxImages& images, const std::vector<std::uint8_t>& labels) {
  if (labels.size() != images.count) throw ConfigError("idx: image and label counts differ");
  Dataset ds;
  ds.rows = images.rows;
  ds.cols = images.cols;
  const std::size_t dim = images.rows * images.cols;
  std::size_t keep = 0;
  for (std::uint8_t l : labels) keep += l <= 1 ? 1 : 0;
  ds.x.resize(static_cast<Index>(dim), static_cast<Index>(keep));
  ds.labels.reserve(keep);
  Index col = 0;
  for (std::size_t i = 0; i < images.count; ++i) {
    if (labels[i] > 1) continue;
    const std::uint8_t* src = images.pixels.data() + i * dim;
    for (std::size_t j = 0; j < dim; ++j) ds.x(static_cast<Index>(j), col) = src[j] / 255.0;
    ds.labels.push_back(labels[i]);
    ++col;
  }
  return ds;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  return binary_subset(read_idx_images(images_path), read_idx_labels(labels_path));
}

}  // namespace pflow
