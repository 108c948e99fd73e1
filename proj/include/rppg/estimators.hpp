#pragma once

// Classical mean-trace rPPG estimators (CHROM, POS) and signal conditioning.

#include <vector>

#include "rppg/core.hpp"

namespace rppg {

/// Per-frame spatial mean of each channel.
struct RgbTraces {
  std::vector<double> r, g, b;
  double fps = 0.0;

  std::size_t size() const noexcept { return r.size(); }
};

/// Integer accumulation for 8-bit clips, so any pixel permutation of a frame
/// yields bit-identical means.
RgbTraces mean_traces(const Clip& clip);
RgbTraces mean_traces(const ClipF& clip);

/// Band-pass filter coefficients (numerator b, denominator a, a[0] = 1).
struct IirCoefficients {
  std::vector<double> b;
  std::vector<double> a;
};

/// Digital Butterworth band-pass of the given prototype order (bilinear
/// transform with pre-warped edges).
IirCoefficients butter_bandpass(int order, double lo_hz, double hi_hz, double fs);

/// Forward-backward filtering with odd-extension padding and steady-state
/// initial conditions (zero net phase).
std::vector<double> filtfilt(const IirCoefficients& coef, std::span<const double> x);

inline constexpr double kBandLoHz = 0.7;
inline constexpr double kBandHiHz = 4.0;

/// 2nd-order Butterworth band-pass, applied forward then backward.
PpgTrace bandpass(const PpgTrace& signal, double lo_hz = kBandLoHz, double hi_hz = kBandHiHz);

inline constexpr std::size_t kChromMinFrames = 64;

PpgTrace chrom(const RgbTraces& traces);
PpgTrace chrom(const Clip& clip);
PpgTrace chrom(const ClipF& clip);

/// POS sliding-window length in frames: ceil(1.6 * fps).
std::size_t pos_window(double fps);

PpgTrace pos(const RgbTraces& traces);
PpgTrace pos(const Clip& clip);
PpgTrace pos(const ClipF& clip);

enum class Estimator { Chrom, Pos };

Estimator parse_estimator(std::string_view name);
std::string_view estimator_name(Estimator e);

PpgTrace estimate_signal(Estimator e, const RgbTraces& traces);

}  // namespace rppg
