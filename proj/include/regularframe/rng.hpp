#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace regularframe {

/// Counter-based generator: draw i of stream s is
///   splitmix64(seed + (s * 2^32 + i + 1) * 0x9E3779B97F4A7C15),
/// so every value depends only on (seed, stream, index).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  static std::uint64_t mix(std::uint64_t z);
  std::uint64_t at(std::uint64_t index) const;
  std::uint64_t next() { return at(counter_++); }
  /// Uniform on (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal by Box-Muller on two consecutive uniforms (cosine branch only).
  double normal();
  std::complex<double> complex_normal();  // E|z|^2 = 1
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

/// Haar unitary: QR of a complex Ginibre matrix with the phases of diag(R) removed.
Eigen::MatrixXcd random_unitary(CounterRng& rng, Eigen::Index n);
Eigen::VectorXcd random_vector(CounterRng& rng, Eigen::Index n);

}  // namespace regularframe
