#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rppg {

/// SplitMix64 (Steele, Lea & Flood). Pinned so that keys and noise fields
/// are reproducible across implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// First output of a SplitMix64 stream seeded with x; used as a stateless hash.
inline std::uint64_t splitmix64_hash(std::uint64_t x) noexcept {
  return SplitMix64(x).next_u64();
}

/// Standard normal draws via Box-Muller on a SplitMix64 stream.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) noexcept : gen_(seed) {}

  double next() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = gen_.next_double();
    while (u1 <= 0.0) u1 = gen_.next_double();
    const double u2 = gen_.next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  SplitMix64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rppg
