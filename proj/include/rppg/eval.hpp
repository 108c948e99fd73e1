#pragma once

// Welch heart-rate extraction, corpus metrics and the smooth-L1 distance.

#include <optional>
#include <span>
#include <vector>

#include "rppg/core.hpp"

namespace rppg {

struct WelchOptions {
  std::size_t max_segment = 256;   // segment length = min(max_segment, len)
  double overlap = 0.5;
  std::size_t min_nfft = 2048;     // nfft = max(min_nfft, next_pow2(4 * segment))
};

struct Spectrum {
  std::vector<double> freqs;  // Hz, 0 .. fs/2
  std::vector<double> power;  // one-sided power spectral density
};

inline constexpr std::size_t kWelchMinLength = 32;

/// Mean of Hann-windowed, zero-padded periodograms over overlapping segments.
Spectrum welch_psd(const PpgTrace& signal, const WelchOptions& opts = {});

struct HrEstimate {
  double bpm = 0.0;
  double peak_hz = 0.0;
  bool low_confidence = false;  // out-of-band peak dominates, or < 3x in-band median
};

HrEstimate estimate_hr(const PpgTrace& signal, double lo_hz = 0.7, double hi_hz = 4.0,
                       const WelchOptions& opts = {});

struct HrMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> pearson_r;  // empty when either side has zero variance
};

HrMetrics hr_metrics(std::span<const double> pred, std::span<const double> gt);

inline constexpr double kSmoothL1Beta = 0.3;

/// Elementwise 0.5*d^2/beta if |d| < beta else |d| - beta/2, mean over elements.
double smooth_l1(std::span<const double> pred, std::span<const double> gt,
                 double beta = kSmoothL1Beta);
double smooth_l1(const PpgTrace& pred, const PpgTrace& gt, double beta = kSmoothL1Beta);

/// Gradient of smooth_l1 with respect to pred.
std::vector<double> smooth_l1_grad(std::span<const double> pred, std::span<const double> gt,
                                   double beta = kSmoothL1Beta);

/// Per-window HRs for a trace sliced into `window`-sample windows at `stride`
/// (window == 0 or longer than the trace: one window spanning it all).
std::vector<double> windowed_hr(const PpgTrace& signal, std::size_t window, std::size_t stride,
                                double lo_hz = 0.7, double hi_hz = 4.0);

double mean_value(std::span<const double> v);

/// Aggregates per-video predictions into MAE/RMSE/Pearson R (fixed order).
HrReport make_report(std::vector<VideoHr> videos);

}  // namespace rppg
