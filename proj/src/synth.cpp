#include "rppg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rppg/rng.hpp"

namespace rppg {

namespace {

void check_hr(double hr) {
  if (!(hr >= 30.0 && hr <= 240.0)) {
    throw Error(ErrorCode::HrOutOfRange,
                "heart rate " + std::to_string(hr) + " bpm outside [30, 240]");
  }
}

void check_options(const SynthOptions& o) {
  check_hr(o.hr_bpm);
  if (!(o.fps > 0.0)) throw Error(ErrorCode::NonPositiveFps, "fps must be > 0");
  if (o.frames == 0) throw Error(ErrorCode::EmptyClip, "frame count must be >= 1");
  if (o.size < 2) throw Error(ErrorCode::InvalidArgument, "frame size must be >= 2");
  if (o.noise_sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
  const double peak = 1.0 + std::abs(o.harmonic2_amp);
  for (int c = 0; c < kChannels; ++c) {
    const double lo = o.base_color[c] - o.pulse_amp[c] * peak;
    const double hi = o.base_color[c] + o.pulse_amp[c] * peak;
    if (lo < 0.0 || hi > 255.0) {
      throw Error(ErrorCode::RangeViolation,
                  "base color +/- pulse amplitude leaves [0,255] in channel " + std::to_string(c));
    }
  }
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::uint64_t noise_seed(std::uint64_t seed, std::size_t frame) {
  return splitmix64_hash(seed ^ splitmix64_hash(frame));
}

bool in_ellipse(double x, double y, double cx, double cy, double rx, double ry) {
  const double dx = (x - cx) / rx, dy = (y - cy) / ry;
  return dx * dx + dy * dy <= 1.0;
}

}  // namespace

PpgTrace synthesize_ppg_samples(double hr_bpm, double fs, std::size_t n, double harmonic2_amp) {
  check_hr(hr_bpm);
  if (!(fs > 0.0)) throw Error(ErrorCode::NonPositiveFps, "fs must be > 0");
  const double f = hr_bpm / 60.0;
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    s[i] = std::sin(2.0 * std::numbers::pi * f * t) +
           harmonic2_amp * std::sin(4.0 * std::numbers::pi * f * t);
  }
  return PpgTrace(std::move(s), fs);
}

PpgTrace synthesize_ppg(double hr_bpm, double fs, double duration_s, double harmonic2_amp) {
  if (!(duration_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "duration must be > 0");
  return synthesize_ppg_samples(hr_bpm, fs, static_cast<std::size_t>(std::lround(duration_s * fs)),
                                harmonic2_amp);
}

double spatial_profile(int x, int y, int height, int width) {
  const double cx = (width - 1) / 2.0, cy = (height - 1) / 2.0;
  const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
  const double rmax2 = cx * cx + cy * cy;
  return rmax2 > 0.0 ? 1.0 - 0.5 * r2 / rmax2 : 1.0;
}

SynthClip synthesize_clip(const SynthOptions& opts) {
  check_options(opts);
  auto ppg = synthesize_ppg_samples(opts.hr_bpm, opts.fps, opts.frames, opts.harmonic2_amp);
  const int n = opts.size;
  std::vector<double> profile(static_cast<std::size_t>(n) * n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) profile[static_cast<std::size_t>(y) * n + x] = spatial_profile(x, y, n, n);
  }
  Clip clip;
  clip.fps = opts.fps;
  clip.source_id = "synth";
  clip.frames.reserve(opts.frames);
  for (std::size_t t = 0; t < opts.frames; ++t) {
    const double p = ppg.values()[t];
    NormalSource noise(noise_seed(opts.seed, t));
    Frame f(n, n);
    auto d = f.data();
    for (std::size_t i = 0; i < profile.size(); ++i) {
      for (int c = 0; c < kChannels; ++c) {
        double v = opts.base_color[c] + profile[i] * opts.pulse_amp[c] * p;
        if (opts.noise_sigma > 0.0) v += opts.noise_sigma * noise.next();
        d[i * kChannels + c] = quantize(v);
      }
    }
    clip.frames.push_back(std::move(f));
  }
  return {std::move(clip), std::move(ppg)};
}

std::vector<Point2> canonical_landmarks(int size) {
  std::vector<Point2> u;  // unit-square layout
  u.reserve(kLandmarkCount);
  for (int i = 0; i <= 16; ++i) {  // jaw, left ear -> chin -> right ear
    const double th = std::numbers::pi - i * std::numbers::pi / 16.0;
    u.push_back({0.5 + 0.42 * std::cos(th), 0.45 + 0.45 * std::sin(th)});
  }
  for (int side = 0; side < 2; ++side) {  // brows
    const double x0 = side == 0 ? 0.18 : 0.56;
    for (int i = 0; i < 5; ++i) {
      const double arch = 0.03 * std::sin(std::numbers::pi * i / 4.0);
      u.push_back({x0 + 0.065 * i, 0.33 - arch});
    }
  }
  for (int i = 0; i < 4; ++i) u.push_back({0.5, 0.40 + 0.065 * i});  // bridge
  const std::array<double, 5> nx{0.42, 0.46, 0.50, 0.54, 0.58};
  const std::array<double, 5> ny{0.64, 0.655, 0.66, 0.655, 0.64};
  for (int i = 0; i < 5; ++i) u.push_back({nx[i], ny[i]});
  for (double cx : {0.31, 0.69}) {  // eyes, six points each
    for (int i = 0; i < 6; ++i) {
      const double th = std::numbers::pi - i * std::numbers::pi / 3.0;
      u.push_back({cx + 0.06 * std::cos(th), 0.42 - 0.02 * std::sin(th)});
    }
  }
  for (int i = 0; i < 12; ++i) {  // outer lip
    const double th = std::numbers::pi - i * std::numbers::pi / 6.0;
    u.push_back({0.5 + 0.15 * std::cos(th), 0.77 - 0.04 * std::sin(th)});
  }
  for (int i = 0; i < 8; ++i) {  // inner lip
    const double th = std::numbers::pi - i * std::numbers::pi / 4.0;
    u.push_back({0.5 + 0.10 * std::cos(th), 0.77 - 0.02 * std::sin(th)});
  }
  std::vector<Point2> pts;
  pts.reserve(u.size());
  for (const auto& p : u) pts.push_back({p.x * (size - 1), p.y * (size - 1)});
  return pts;
}

SynthFace synthesize_face_clip(const SynthOptions& opts, int face_size) {
  check_options(opts);
  if (face_size < 64) throw Error(ErrorCode::InvalidArgument, "face frames must be >= 64 px");
  auto ppg = synthesize_ppg_samples(opts.hr_bpm, opts.fps, opts.frames, opts.harmonic2_amp);
  const auto pts = canonical_landmarks(face_size);
  const double s = face_size - 1;

  // 0 background, 1 skin, 2 eye/brow, 3 mouth
  std::vector<std::uint8_t> label(static_cast<std::size_t>(face_size) * face_size, 0);
  for (int y = 0; y < face_size; ++y) {
    for (int x = 0; x < face_size; ++x) {
      const double ux = x / s, uy = y / s;
      std::uint8_t l = 0;
      if (in_ellipse(ux, uy, 0.5, 0.48, 0.47, 0.47)) l = 1;
      if (in_ellipse(ux, uy, 0.31, 0.42, 0.07, 0.03) || in_ellipse(ux, uy, 0.69, 0.42, 0.07, 0.03) ||
          in_ellipse(ux, uy, 0.31, 0.32, 0.15, 0.015) || in_ellipse(ux, uy, 0.69, 0.32, 0.15, 0.015)) {
        l = 2;
      }
      if (in_ellipse(ux, uy, 0.5, 0.77, 0.15, 0.045)) l = 3;
      label[static_cast<std::size_t>(y) * face_size + x] = l;
    }
  }
  constexpr std::array<std::array<double, 3>, 4> kStatic{{
      {60.0, 60.0, 60.0}, {0.0, 0.0, 0.0}, {40.0, 30.0, 30.0}, {120.0, 50.0, 50.0}}};

  SynthFace out{{}, std::move(ppg), {}};
  out.clip.fps = opts.fps;
  out.clip.source_id = "synth-face";
  for (std::size_t t = 0; t < opts.frames; ++t) {
    const double p = out.ppg.values()[t];
    NormalSource noise(noise_seed(opts.seed, t));
    Frame f(face_size, face_size);
    for (int y = 0; y < face_size; ++y) {
      for (int x = 0; x < face_size; ++x) {
        const auto l = label[static_cast<std::size_t>(y) * face_size + x];
        const double prof = spatial_profile(x, y, face_size, face_size);
        for (int c = 0; c < kChannels; ++c) {
          double v = l == 1 ? opts.base_color[c] + prof * opts.pulse_amp[c] * p : kStatic[l][c];
          if (opts.noise_sigma > 0.0) v += opts.noise_sigma * noise.next();
          f.at(y, x, c) = quantize(v);
        }
      }
    }
    out.clip.frames.push_back(std::move(f));
    out.landmarks.emplace_back(pts, static_cast<int>(t));
  }
  return out;
}

}  // namespace rppg
