#include "rppg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rppg/rng.hpp"

namespace rppg {

namespace {

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::uint64_t frame_seed(std::uint64_t seed, std::size_t frame) {
  return splitmix64_hash(seed ^ splitmix64_hash(frame));
}

template <typename F>
Clip map_frames(const Clip& clip, F&& fn) {
  validate_clip(clip);
  Clip out = clip;
  for (auto& f : out.frames) f = fn(f);
  return out;
}

// Row-major 8x8 orthonormal DCT-II basis: basis[u][x].
const std::array<std::array<double, kDctBlock>, kDctBlock>& dct_basis() {
  static const auto basis = [] {
    std::array<std::array<double, kDctBlock>, kDctBlock> b{};
    for (int u = 0; u < kDctBlock; ++u) {
      const double scale = u == 0 ? std::sqrt(1.0 / kDctBlock) : std::sqrt(2.0 / kDctBlock);
      for (int x = 0; x < kDctBlock; ++x) {
        b[u][x] = scale * std::cos((2 * x + 1) * u * std::numbers::pi / (2.0 * kDctBlock));
      }
    }
    return b;
  }();
  return basis;
}

constexpr std::array<std::array<std::uint8_t, 3>, 6> kChannelOrders = {{
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
}};

void check_block_dims(const Frame& frame, int block) {
  if (frame.empty() || frame.height() % block != 0 || frame.width() % block != 0) {
    throw Error(ErrorCode::BadDims, "frame " + std::to_string(frame.height()) + "x" +
                                        std::to_string(frame.width()) +
                                        " is not divisible into " + std::to_string(block) +
                                        "x" + std::to_string(block) + " blocks");
  }
}

Frame bdct_apply(const Frame& frame, const PermutationKey& key, bool inverse) {
  check_block_dims(frame, kDctBlock);
  if (key.n() != kDctBlock * kDctBlock) {
    throw Error(ErrorCode::SizeMismatch, "BDCT key must cover 64 coefficients");
  }
  Frame out(frame.height(), frame.width());
  std::array<double, 64> px{}, coef{}, moved{}, back{};
  for (int by = 0; by < frame.height(); by += kDctBlock) {
    for (int bx = 0; bx < frame.width(); bx += kDctBlock) {
      for (int c = 0; c < kChannels; ++c) {
        for (int y = 0; y < kDctBlock; ++y) {
          for (int x = 0; x < kDctBlock; ++x) px[y * kDctBlock + x] = frame.at(by + y, bx + x, c);
        }
        dct8x8(px, coef);
        for (std::size_t q = 0; q < 64; ++q) {
          if (inverse) {
            moved[key[q]] = coef[q];
          } else {
            moved[q] = coef[key[q]];
          }
        }
        idct8x8(moved, back);
        for (int y = 0; y < kDctBlock; ++y) {
          for (int x = 0; x < kDctBlock; ++x) {
            out.at(by + y, bx + x, c) = quantize(back[y * kDctBlock + x]);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

std::vector<double> gaussian_noise_field(std::uint64_t seed, std::size_t count, double variance) {
  if (variance < 0.0) throw Error(ErrorCode::InvalidArgument, "noise variance must be >= 0");
  const double sd = std::sqrt(variance);
  NormalSource src(seed);
  std::vector<double> out(count);
  for (auto& v : out) v = sd * src.next();
  return out;
}

Clip add_gaussian_noise(const Clip& clip, double variance, std::uint64_t seed) {
  validate_clip(clip);
  if (variance < 0.0) throw Error(ErrorCode::InvalidArgument, "noise variance must be >= 0");
  if (variance == 0.0) return clip;
  Clip out = clip;
  for (std::size_t f = 0; f < out.frames.size(); ++f) {
    auto data = out.frames[f].data();
    const auto noise = gaussian_noise_field(frame_seed(seed, f), data.size(), variance);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double v = std::clamp(data[i] / 255.0 + noise[i], 0.0, 1.0);
      data[i] = quantize(v * 255.0);
    }
  }
  return out;
}

void dct8x8(std::span<const double, 64> in, std::span<double, 64> out) {
  const auto& b = dct_basis();
  std::array<double, 64> rows{};
  for (int y = 0; y < kDctBlock; ++y) {
    for (int u = 0; u < kDctBlock; ++u) {
      double acc = 0.0;
      for (int x = 0; x < kDctBlock; ++x) acc += b[u][x] * in[y * kDctBlock + x];
      rows[y * kDctBlock + u] = acc;
    }
  }
  for (int v = 0; v < kDctBlock; ++v) {
    for (int u = 0; u < kDctBlock; ++u) {
      double acc = 0.0;
      for (int y = 0; y < kDctBlock; ++y) acc += b[v][y] * rows[y * kDctBlock + u];
      out[v * kDctBlock + u] = acc;
    }
  }
}

void idct8x8(std::span<const double, 64> in, std::span<double, 64> out) {
  const auto& b = dct_basis();
  std::array<double, 64> rows{};
  for (int y = 0; y < kDctBlock; ++y) {
    for (int u = 0; u < kDctBlock; ++u) {
      double acc = 0.0;
      for (int v = 0; v < kDctBlock; ++v) acc += b[v][y] * in[v * kDctBlock + u];
      rows[y * kDctBlock + u] = acc;
    }
  }
  for (int y = 0; y < kDctBlock; ++y) {
    for (int x = 0; x < kDctBlock; ++x) {
      double acc = 0.0;
      for (int u = 0; u < kDctBlock; ++u) acc += b[u][x] * rows[y * kDctBlock + u];
      out[y * kDctBlock + x] = acc;
    }
  }
}

Frame bdct_mask(const Frame& frame, const PermutationKey& key) {
  return bdct_apply(frame, key, false);
}

Frame bdct_unmask(const Frame& frame, const PermutationKey& key) {
  return bdct_apply(frame, key, true);
}

Clip bdct_clip(const Clip& clip, const PermutationKey& key) {
  return map_frames(clip, [&](const Frame& f) { return bdct_mask(f, key); });
}

LeKey LeKey::null() {
  LeKey k;
  std::iota(k.pixel_perm.begin(), k.pixel_perm.end(), std::uint8_t{0});
  return k;
}

LeKey LeKey::from_seed(std::uint64_t seed) {
  LeKey k = null();
  SplitMix64 gen(seed);
  for (int i = kLePositions - 1; i > 0; --i) {
    const auto j = gen.next_u64() % static_cast<std::uint64_t>(i + 1);
    std::swap(k.pixel_perm[i], k.pixel_perm[j]);
  }
  for (auto& c : k.channel_perm) c = static_cast<std::uint8_t>(gen.next_u64() % 6);
  for (auto&& r : k.reverse) r = (gen.next_u64() & 1u) != 0;
  return k;
}

Frame le_encrypt(const Frame& frame, const LeKey& key) {
  check_block_dims(frame, kLeBlock);
  Frame out(frame.height(), frame.width());
  for (int by = 0; by < frame.height(); by += kLeBlock) {
    for (int bx = 0; bx < frame.width(); bx += kLeBlock) {
      for (int p = 0; p < kLePositions; ++p) {
        const int src = key.pixel_perm[p];
        const int sy = by + src / kLeBlock, sx = bx + src % kLeBlock;
        const int dy = by + p / kLeBlock, dx = bx + p % kLeBlock;
        const auto& order = kChannelOrders[key.channel_perm[p]];
        for (int c = 0; c < kChannels; ++c) {
          const std::uint8_t v = frame.at(sy, sx, order[c]);
          out.at(dy, dx, c) = key.reverse[p] ? static_cast<std::uint8_t>(255 - v) : v;
        }
      }
    }
  }
  return out;
}

Frame le_decrypt(const Frame& frame, const LeKey& key) {
  check_block_dims(frame, kLeBlock);
  Frame out(frame.height(), frame.width());
  for (int by = 0; by < frame.height(); by += kLeBlock) {
    for (int bx = 0; bx < frame.width(); bx += kLeBlock) {
      for (int p = 0; p < kLePositions; ++p) {
        const int src = key.pixel_perm[p];
        const int sy = by + src / kLeBlock, sx = bx + src % kLeBlock;
        const int dy = by + p / kLeBlock, dx = bx + p % kLeBlock;
        const auto& order = kChannelOrders[key.channel_perm[p]];
        for (int c = 0; c < kChannels; ++c) {
          const std::uint8_t v = frame.at(dy, dx, c);
          out.at(sy, sx, order[c]) = key.reverse[p] ? static_cast<std::uint8_t>(255 - v) : v;
        }
      }
    }
  }
  return out;
}

Clip le_clip(const Clip& clip, const LeKey& key) {
  return map_frames(clip, [&](const Frame& f) { return le_encrypt(f, key); });
}

ClipF to_unit_range(const Clip& clip) {
  validate_clip(clip);
  ClipF out{{}, clip.fps, clip.source_id, clip.window_index};
  out.frames.reserve(clip.size());
  for (const auto& f : clip.frames) {
    std::vector<float> data(f.data().size());
    std::transform(f.data().begin(), f.data().end(), data.begin(),
                   [](std::uint8_t v) { return static_cast<float>(v / 127.5 - 1.0); });
    out.frames.emplace_back(f.height(), f.width(), std::move(data));
  }
  return out;
}

ClipF to_intensity_range(const ClipF& clip) {
  validate_clip(clip);
  ClipF out = clip;
  for (auto& f : out.frames) {
    for (auto& v : f.data()) v = static_cast<float>((static_cast<double>(v) + 1.0) * 127.5);
  }
  return out;
}

ClipF instahide_mix(const Clip& a, const Clip& b, std::array<double, 2> weights,
                    std::optional<std::uint64_t> sign_seed) {
  validate_clip(a);
  validate_clip(b);
  if (a.size() != b.size() || a.height() != b.height() || a.width() != b.width()) {
    throw Error(ErrorCode::ShapeMismatch, "InstaHide inputs must have identical shape");
  }
  if (weights[0] < 0.0 || weights[1] < 0.0 || std::abs(weights[0] + weights[1] - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "InstaHide weights must be >= 0 and sum to 1");
  }
  ClipF out{{}, a.fps, a.source_id, a.window_index};
  out.frames.reserve(a.size());
  for (std::size_t f = 0; f < a.size(); ++f) {
    const auto da = a.frames[f].data();
    const auto db = b.frames[f].data();
    std::vector<float> data(da.size());
    std::optional<SplitMix64> signs;
    if (sign_seed) signs.emplace(frame_seed(*sign_seed, f));
    for (std::size_t i = 0; i < da.size(); ++i) {
      double v = weights[0] * (da[i] / 127.5 - 1.0) + weights[1] * (db[i] / 127.5 - 1.0);
      if (signs && (signs->next_u64() >> 63) != 0) v = -v;
      data[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
    }
    out.frames.emplace_back(a.frames[f].height(), a.frames[f].width(), std::move(data));
  }
  return out;
}

std::array<double, 2> instahide_weights(std::uint64_t seed) {
  const double w0 = SplitMix64(seed).next_double();
  return {w0, 1.0 - w0};
}

}  // namespace rppg
