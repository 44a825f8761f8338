#include "fedsim/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fedsim {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// SplitMix64 finalizer; passes BigCrush as the output stage of a
// Weyl-sequence generator.
std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : key_(mix64(seed + kGolden)), counter_(0) {}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(mix64(key_ + kGolden * (stream + 1)), 0);
}

std::uint64_t Rng::next_u64() {
  counter_ += 1;
  return mix64(key_ ^ mix64(counter_ * kGolden));
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  return static_cast<std::size_t>(uniform() * static_cast<double>(n));
}

double Rng::uniform_symmetric(double r) {
  return r * (2.0 * uniform() - 1.0);
}

double Rng::gaussian() {
  // u1 kept strictly positive so log(u1) is finite.
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("sample_indices: k exceeds n");
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + uniform_index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::vector<double> gaussian_sample(Rng& rng, double mean, double std, std::size_t n) {
  if (std < 0.0) throw std::invalid_argument("gaussian_sample: std must be non-negative");
  std::vector<double> out(n, mean);
  if (std == 0.0) return out;
  for (std::size_t i = 0; i < n; ++i) out[i] = mean + std * rng.gaussian();
  return out;
}

}  // namespace fedsim
