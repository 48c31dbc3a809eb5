#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace edgefl {

/// Seeded random stream. Wraps std::mt19937_64 (whose output sequence is fixed by the
/// standard) and converts raw words to doubles/indices itself, so draws are reproducible
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Independent stream keyed by (master_seed, label). Identical inputs give identical streams.
Rng derive_stream(std::uint64_t master_seed, std::string_view label);

}  // namespace edgefl
