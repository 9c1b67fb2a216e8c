#pragma once

#include <cstdint>
#include <random>

namespace osl {

/// SplitMix64 finaliser; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the stream with the given index, derived by hashing (seed, index).
/// Streams for distinct indices are statistically independent.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Caller-owned random stream. Not shareable between threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }
  /// Uniform on (0, 1).
  double uniform_open();
  double exponential(double rate);
  double normal() { return normal_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace osl
