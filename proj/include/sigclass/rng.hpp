/**
 * @file rng.hpp
 * @brief Keyed, splittable random streams with a platform-independent output sequence.
 *
 * The standard distributions (std::normal_distribution, std::shuffle, ...) are
 * implementation-defined, so everything that ends up in a file is drawn from
 * SplitMix64 and transformed here.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace sigclass {

/// 64-bit FNV-1a.
[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                              std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SeedStream {
 public:
  explicit SeedStream(std::uint64_t seed) noexcept : state_(seed) {}

  /// Child stream whose content depends only on this stream's seed and the key.
  [[nodiscard]] SeedStream child(std::string_view key) const noexcept {
    return SeedStream(mix64(origin_ ^ fnv1a64(key)) ^ 0x6a09e667f3bcc909ULL, true);
  }
  [[nodiscard]] SeedStream child(std::uint64_t key) const noexcept {
    return SeedStream(mix64(origin_ ^ mix64(key + 0x9e3779b97f4a7c15ULL)), true);
  }

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t bounded(std::uint64_t bound) noexcept {
    const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= limit) return r % bound;
    }
  }

  /// Standard normal via Box-Muller; each call consumes two uniforms.
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  SeedStream(std::uint64_t seed, bool) noexcept : state_(seed), origin_(seed) {}

  std::uint64_t state_;
  std::uint64_t origin_{state_};
};

}  // namespace sigclass
