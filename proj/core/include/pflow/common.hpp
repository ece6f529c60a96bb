#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace pflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Invalid configuration or arguments supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed binary or text input. `offset()` is the byte position of the
/// first byte that could not be interpreted.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A computation left its domain of validity (divergence, no crossing, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Rule { kSupervised, kReinforce };

enum class Activation { kErfSigmoid, kLogistic };

std::string_view to_string(Rule rule);
std::string_view to_string(Activation activation);
Rule parse_rule(std::string_view name);
Activation parse_activation(std::string_view name);

/// Random engine used everywhere in the library.
using Rng = std::mt19937_64;

/// Independent stream for (seed, stream) so ensembles do not depend on the
/// order in which runs are executed.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

/// Cosine between `w` and `reference`; 0 when either vector vanishes.
inline double alignment(const Vector& w, const Vector& reference) {
  const double nw = w.norm();
  const double nr = reference.norm();
  if (nw == 0.0 || nr == 0.0) return 0.0;
  return w.dot(reference) / (nw * nr);
}

}  // namespace pflow
