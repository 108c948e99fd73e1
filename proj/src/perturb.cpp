#include "rppg/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rppg/rng.hpp"

namespace rppg {

PermutationKey keygen(std::uint64_t seed, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "keygen requires n >= 1");
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  SplitMix64 gen(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = gen.next_u64() % (i + 1);
    std::swap(perm[i], perm[j]);
  }
  return PermutationKey(std::move(perm), SeededProvenance{seed, kKeyAlgorithm});
}

std::uint64_t sample_key_seed(const KeyPolicy& policy, std::uint64_t sample_index) {
  policy.validate();
  switch (policy.mode) {
    case KeyMode::Fixed:
      return policy.master_seed;
    case KeyMode::Pool:
      return policy.master_seed + splitmix64_hash(sample_index) % policy.pool_size;
    case KeyMode::Unbounded:
      return splitmix64_hash(policy.master_seed ^ sample_index);
  }
  return policy.master_seed;
}

PermutationKey derive_sample_key(const KeyPolicy& policy, std::uint64_t sample_index,
                                 std::size_t n) {
  return keygen(sample_key_seed(policy, sample_index), n);
}

namespace {

void check_pixel_key(const Frame& frame, const PermutationKey& key) {
  if (key.n() != frame.pixel_count()) {
    throw Error(ErrorCode::SizeMismatch,
                "key covers " + std::to_string(key.n()) + " positions but frame has " +
                    std::to_string(frame.pixel_count()) + " pixels");
  }
}

void check_patch(const Frame& frame, int patch, const PermutationKey& key) {
  if (patch < 1 || frame.height() % patch != 0 || frame.width() % patch != 0) {
    throw Error(ErrorCode::BadPatchSize, "patch size " + std::to_string(patch) +
                                             " does not divide the frame dimensions");
  }
  const std::size_t blocks =
      static_cast<std::size_t>(frame.height() / patch) * (frame.width() / patch);
  if (key.n() != blocks) {
    throw Error(ErrorCode::SizeMismatch, "key covers " + std::to_string(key.n()) +
                                             " patches but frame has " + std::to_string(blocks));
  }
}

void copy_pixel(std::span<const std::uint8_t> src, std::size_t from, std::span<std::uint8_t> dst,
                std::size_t to) {
  std::copy_n(src.begin() + from * kChannels, kChannels, dst.begin() + to * kChannels);
}

// dst block `to` <- src block `from`
void copy_block(const Frame& src, std::size_t from, Frame& dst, std::size_t to, int patch) {
  const int blocks_per_row = src.width() / patch;
  const int sy = static_cast<int>(from / blocks_per_row) * patch;
  const int sx = static_cast<int>(from % blocks_per_row) * patch;
  const int dy = static_cast<int>(to / blocks_per_row) * patch;
  const int dx = static_cast<int>(to % blocks_per_row) * patch;
  for (int r = 0; r < patch; ++r) {
    const auto* s = &src.at(sy + r, sx, 0);
    std::copy_n(s, static_cast<std::size_t>(patch) * kChannels, &dst.at(dy + r, dx, 0));
  }
}

}  // namespace

Frame shuffle_pixels(const Frame& frame, const PermutationKey& key) {
  check_pixel_key(frame, key);
  Frame out(frame.height(), frame.width());
  const auto src = frame.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < key.n(); ++i) copy_pixel(src, key[i], dst, i);
  return out;
}

Frame unshuffle_pixels(const Frame& frame, const PermutationKey& key) {
  check_pixel_key(frame, key);
  Frame out(frame.height(), frame.width());
  const auto src = frame.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < key.n(); ++i) copy_pixel(src, i, dst, key[i]);
  return out;
}

Frame shuffle_patches(const Frame& frame, int patch, const PermutationKey& key) {
  check_patch(frame, patch, key);
  Frame out(frame.height(), frame.width());
  for (std::size_t i = 0; i < key.n(); ++i) copy_block(frame, key[i], out, i, patch);
  return out;
}

Frame unshuffle_patches(const Frame& frame, int patch, const PermutationKey& key) {
  check_patch(frame, patch, key);
  Frame out(frame.height(), frame.width());
  for (std::size_t i = 0; i < key.n(); ++i) copy_block(frame, i, out, key[i], patch);
  return out;
}

std::size_t shuffle_domain(int patch) {
  if (patch < 1 || kRoiSize % patch != 0) {
    throw Error(ErrorCode::BadPatchSize,
                "patch size " + std::to_string(patch) + " does not divide 64");
  }
  const std::size_t side = kRoiSize / patch;
  return side * side;
}

std::vector<double> gaussian_kernel(int k) {
  if (k < 3 || k % 2 == 0) {
    throw Error(ErrorCode::BadKernel,
                "blur kernel size " + std::to_string(k) + " must be odd and >= 3");
  }
  const double sigma = (k - 1) / 4.0;
  const int r = k / 2;
  std::vector<double> w(k);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    w[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += w[i + r];
  }
  for (auto& v : w) v /= sum;
  return w;
}

Frame gaussian_blur(const Frame& frame, int k) {
  const auto w = gaussian_kernel(k);
  if (frame.empty()) throw Error(ErrorCode::EmptyInput, "cannot blur an empty frame");
  const int h = frame.height();
  const int wd = frame.width();
  const int r = k / 2;
  std::vector<double> tmp(static_cast<std::size_t>(h) * wd * kChannels);
  auto tmp_at = [&](int y, int x, int c) -> double& {
    return tmp[(static_cast<std::size_t>(y) * wd + x) * kChannels + c];
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < wd; ++x) {
      for (int c = 0; c < kChannels; ++c) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) {
          const int xx = std::clamp(x + i, 0, wd - 1);
          acc += w[i + r] * frame.at(y, xx, c);
        }
        tmp_at(y, x, c) = acc;
      }
    }
  }
  Frame out(h, wd);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < wd; ++x) {
      for (int c = 0; c < kChannels; ++c) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) {
          const int yy = std::clamp(y + i, 0, h - 1);
          acc += w[i + r] * tmp_at(yy, x, c);
        }
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
      }
    }
  }
  return out;
}

Clip perturb_clip(const Clip& clip, const PerturbSpec& spec, const PermutationKey& key) {
  validate_clip(clip);
  spec.validate();
  Clip out = clip;
  switch (spec.method) {
    case PerturbMethod::Roi:
      return out;
    case PerturbMethod::RoiShuffle:
    case PerturbMethod::RoiShuffleBlur:
    case PerturbMethod::RoiShufflePatch:
      break;
    default:
      throw Error(ErrorCode::InvalidArgument,
                  "perturb_clip does not handle baseline method " + method_name(spec));
  }
  const bool patches = spec.method == PerturbMethod::RoiShufflePatch && spec.patch_size > 1;
  for (auto& f : out.frames) {
    f = patches ? shuffle_patches(f, spec.patch_size, key) : shuffle_pixels(f, key);
    if (spec.blur_kernel && spec.method != PerturbMethod::RoiShuffle) {
      f = gaussian_blur(f, *spec.blur_kernel);
    }
  }
  return out;
}

double log10_keyspace(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "key space requires n >= 1");
  double acc = 0.0;
  for (std::size_t k = 2; k <= n; ++k) acc += std::log10(static_cast<double>(k));
  return acc;
}

}  // namespace rppg
