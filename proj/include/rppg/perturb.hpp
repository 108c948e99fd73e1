#pragma once

// The privacy transform: keyed pixel/patch shuffling followed by Gaussian blur.

#include <cstdint>
#include <vector>

#include "rppg/core.hpp"

namespace rppg {

/// Fisher-Yates shuffle of [0, n): for i = n-1 down to 1, swap i with
/// next_u64() % (i + 1), drawing from SplitMix64(seed).
PermutationKey keygen(std::uint64_t seed, std::size_t n);

/// Seed that derive_sample_key feeds to keygen for a given sample.
std::uint64_t sample_key_seed(const KeyPolicy& policy, std::uint64_t sample_index);

/// Key shared by every frame of sample `sample_index` under `policy`.
PermutationKey derive_sample_key(const KeyPolicy& policy, std::uint64_t sample_index,
                                 std::size_t n);

/// Output position i takes input pixel key[i]; the three channels move together.
Frame shuffle_pixels(const Frame& frame, const PermutationKey& key);
Frame unshuffle_pixels(const Frame& frame, const PermutationKey& key);

/// Permutes non-overlapping patch x patch blocks (row-major block order).
Frame shuffle_patches(const Frame& frame, int patch, const PermutationKey& key);
Frame unshuffle_patches(const Frame& frame, int patch, const PermutationKey& key);

/// Number of shuffled units for a 64x64 frame at the given patch size.
std::size_t shuffle_domain(int patch);

/// Normalized 1-D Gaussian taps of odd length k, sigma = (k - 1) / 4.
std::vector<double> gaussian_kernel(int k);

/// Separable Gaussian blur with edge-replicate borders, rounded to 8 bits.
Frame gaussian_blur(const Frame& frame, int k);

/// Applies shuffle (pixel or patch level, one key for the whole clip) and
/// then blur, according to spec. Only the roi / roi+sh / roi+sh+b / patch
/// methods are handled here.
Clip perturb_clip(const Clip& clip, const PerturbSpec& spec, const PermutationKey& key);

/// log10(n!) by exact summation of log10(k).
double log10_keyspace(std::size_t n);

}  // namespace rppg
