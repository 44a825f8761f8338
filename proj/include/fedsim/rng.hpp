#pragma once

#include <cstdint>
#include <vector>

namespace fedsim {

/// Counter-based pseudo-random stream. Every output is a pure function of
/// (key, counter), and split() derives a child key without consuming any
/// draws, so the stream for one client never depends on how many other
/// clients exist or how much randomness they consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent child stream identified by `stream`. Does not advance
  /// this generator; split(i) always yields the same child for the same i.
  Rng split(std::uint64_t stream) const;

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform();

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Uniform in (-r, r).
  double uniform_symmetric(double r);

  /// One standard normal draw (Box-Muller, two uniforms per call).
  double gaussian();

  /// First k elements of a uniformly random permutation of 0..n-1.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_;
};

/// n i.i.d. draws from N(mean, std^2). std = 0 yields the constant mean and
/// consumes no randomness. Negative std is rejected.
std::vector<double> gaussian_sample(Rng& rng, double mean, double std, std::size_t n);

}  // namespace fedsim
