#pragma once

// Competing privacy perturbations, implemented as clip transforms so the
// classical estimators can be run on their output.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rppg/core.hpp"

namespace rppg {

// ---- Gaussian noise -------------------------------------------------------

/// i.i.d. N(0, variance) draws from a SplitMix64/Box-Muller stream.
std::vector<double> gaussian_noise_field(std::uint64_t seed, std::size_t count, double variance);

/// Adds noise in the normalized [0,1] intensity domain, clips to [0,1] and
/// re-quantizes. Frame f uses its own stream, so frames are independent of
/// processing order.
Clip add_gaussian_noise(const Clip& clip, double variance, std::uint64_t seed);

// ---- Block DCT masking ----------------------------------------------------

inline constexpr int kDctBlock = 8;

/// Orthonormal 8x8 DCT-II and its inverse on a row-major block.
void dct8x8(std::span<const double, 64> in, std::span<double, 64> out);
void idct8x8(std::span<const double, 64> in, std::span<double, 64> out);

/// Per channel: block DCT, coefficient index q of every block replaced by
/// coefficient key[q], inverse DCT, rounded and clamped.
Frame bdct_mask(const Frame& frame, const PermutationKey& key);
Frame bdct_unmask(const Frame& frame, const PermutationKey& key);
Clip bdct_clip(const Clip& clip, const PermutationKey& key);

// ---- Block-wise learnable-encryption style scrambling ---------------------

inline constexpr int kLeBlock = 4;
inline constexpr int kLePositions = kLeBlock * kLeBlock;

/// Key material shared by every 4x4 block.
struct LeKey {
  std::array<std::uint8_t, kLePositions> pixel_perm{};  // dst position p <- src pixel_perm[p]
  std::array<std::uint8_t, kLePositions> channel_perm{}; // index into the 6 RGB orderings
  std::array<bool, kLePositions> reverse{};              // v -> 255 - v at dst position p

  static LeKey null();
  static LeKey from_seed(std::uint64_t seed);
};

Frame le_encrypt(const Frame& frame, const LeKey& key);
Frame le_decrypt(const Frame& frame, const LeKey& key);
Clip le_clip(const Clip& clip, const LeKey& key);

// ---- InstaHide-style mixing ---------------------------------------------

/// 8-bit intensities mapped to [-1, 1].
ClipF to_unit_range(const Clip& clip);

/// [-1, 1] mapped back to [0, 255] as real values (for mean-trace estimators).
ClipF to_intensity_range(const ClipF& clip);

/// Per frame: weights[0]*a + weights[1]*b in the [-1,1] domain, then a random
/// sign flip per element when sign_seed is given.
ClipF instahide_mix(const Clip& a, const Clip& b, std::array<double, 2> weights,
                    std::optional<std::uint64_t> sign_seed);

/// Mixing weights drawn from a seed: w0 uniform in [0,1), w1 = 1 - w0.
std::array<double, 2> instahide_weights(std::uint64_t seed);

}  // namespace rppg
