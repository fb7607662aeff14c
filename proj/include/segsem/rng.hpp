#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace segsem {

/// splitmix64 finalizer; used for seeding and for mixing indices into seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and a sequence of indices.
/// seed' = splitmix64(seed ^ splitmix64(i0)), folded over every index in order.
template <typename... Ix>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Ix... indices) noexcept {
  ((seed = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(indices)))), ...);
  return seed;
}

/// 64-bit FNV-1a, for turning identifiers into stream indices.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

/// xorshift64* generator.
///
/// State update: x ^= x >> 12; x ^= x << 25; x ^= x >> 27; output = x * 0x2545F4914F6CDD1D.
/// The state is initialised as splitmix64(seed), with 0 replaced by a fixed odd constant.
/// Only integer operations are involved, so streams are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(splitmix64(seed)) {
    if (state_ == 0) state_ = 0x853C49E6748FEA9Bull;
  }

  std::uint64_t next() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1Dull;
  }

  /// Uniform in [0,1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(span == 0 ? next() : next() % span);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal deviate via Box-Muller (cosine branch only; two draws per deviate).
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0,1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace segsem
