#pragma once

// Synthetic clips with a known pulse, used as a test oracle and demo corpus.

#include <array>
#include <cstdint>
#include <vector>

#include "rppg/core.hpp"

namespace rppg {

/// sin(2*pi*f*t) + harmonic2_amp * sin(4*pi*f*t), f = hr / 60, n samples at fs.
PpgTrace synthesize_ppg_samples(double hr_bpm, double fs, std::size_t n,
                                double harmonic2_amp = 0.3);

/// As above with n = round(duration_s * fs).
PpgTrace synthesize_ppg(double hr_bpm, double fs, double duration_s,
                        double harmonic2_amp = 0.3);

struct SynthOptions {
  double hr_bpm = 72.0;
  double fps = 30.0;
  std::size_t frames = 300;
  std::array<double, 3> base_color{150.0, 110.0, 95.0};
  std::array<double, 3> pulse_amp{0.6, 1.0, 0.4};
  double noise_sigma = 0.0;  // intensity units
  std::uint64_t seed = 0;
  double harmonic2_amp = 0.3;
  int size = kRoiSize;       // square ROI side
};

struct SynthClip {
  Clip clip;
  PpgTrace ppg;  // exact modulation, one sample per frame
};

/// Smooth spatial weighting in [0.5, 1]: 1 - 0.5 * (r / r_max)^2 about the centre.
double spatial_profile(int x, int y, int height, int width);

/// pixel(x,y,c,t) = base_c + profile(x,y) * amp_c * ppg(t) + noise, rounded and clamped.
SynthClip synthesize_clip(const SynthOptions& opts);

struct SynthFace {
  Clip clip;
  PpgTrace ppg;
  std::vector<LandmarkSet> landmarks;
};

/// Canonical 68-point layout scaled to a size x size frame.
std::vector<Point2> canonical_landmarks(int size);

/// Face-like frames (pulsing skin, static eyes/brows/mouth and background)
/// with per-frame landmarks, for exercising ROI assembly end to end.
SynthFace synthesize_face_clip(const SynthOptions& opts, int face_size);

}  // namespace rppg
