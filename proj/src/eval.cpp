#include "rppg/eval.hpp"

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

namespace rppg {

namespace {

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::LengthMismatch,
                "length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

Spectrum welch_psd(const PpgTrace& signal, const WelchOptions& opts) {
  const auto x = signal.samples();
  if (x.size() < kWelchMinLength) {
    throw Error(ErrorCode::TooShort, "Welch PSD needs at least 32 samples, got " +
                                         std::to_string(x.size()));
  }
  const std::size_t seg = std::min(opts.max_segment, x.size());
  const std::size_t nfft = std::max(opts.min_nfft, next_pow2(4 * seg));
  const auto hop_overlap = static_cast<std::size_t>(std::floor(seg * opts.overlap));
  const std::size_t step = std::max<std::size_t>(1, seg - hop_overlap);

  std::vector<double> window(seg);
  double wsum2 = 0.0;
  for (std::size_t i = 0; i < seg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / seg);
    wsum2 += window[i] * window[i];
  }

  const std::size_t bins = nfft / 2 + 1;
  Spectrum out;
  out.freqs.resize(bins);
  out.power.assign(bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    out.freqs[k] = static_cast<double>(k) * signal.fs() / static_cast<double>(nfft);
  }

  Eigen::FFT<double> fft;
  std::vector<double> buf(nfft, 0.0);
  std::vector<std::complex<double>> spec;
  std::size_t segments = 0;
  for (std::size_t start = 0; start + seg <= x.size(); start += step) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t i = 0; i < seg; ++i) buf[i] = x[start + i] * window[i];
    fft.fwd(spec, buf);
    for (std::size_t k = 0; k < bins; ++k) out.power[k] += std::norm(spec[k]);
    ++segments;
  }
  const double scale = 1.0 / (signal.fs() * wsum2 * static_cast<double>(segments));
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || (nfft % 2 == 0 && k == bins - 1);
    out.power[k] *= scale * (edge ? 1.0 : 2.0);
  }
  return out;
}

HrEstimate estimate_hr(const PpgTrace& signal, double lo_hz, double hi_hz,
                       const WelchOptions& opts) {
  if (!(lo_hz >= 0.0 && lo_hz < hi_hz)) {
    throw Error(ErrorCode::InvalidArgument, "heart-rate band must satisfy 0 <= lo < hi");
  }
  const auto psd = welch_psd(signal, opts);
  std::vector<double> in_band;
  std::size_t best = psd.freqs.size();
  double out_of_band = 0.0;
  for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
    if (psd.freqs[k] < lo_hz || psd.freqs[k] > hi_hz) {
      out_of_band = std::max(out_of_band, psd.power[k]);
      continue;
    }
    in_band.push_back(psd.power[k]);
    if (best == psd.freqs.size() || psd.power[k] > psd.power[best]) best = k;
  }
  if (in_band.empty()) {
    throw Error(ErrorCode::InvalidArgument, "heart-rate band holds no spectral bins");
  }
  const auto mid = in_band.begin() + static_cast<std::ptrdiff_t>(in_band.size() / 2);
  std::nth_element(in_band.begin(), mid, in_band.end());
  double median = *mid;
  if (in_band.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(in_band.begin(), mid));
  }
  HrEstimate est;
  est.peak_hz = psd.freqs[best];
  est.bpm = 60.0 * est.peak_hz;
  // dominant energy outside the band means the peak was forced in-band
  est.low_confidence = psd.power[best] < out_of_band || psd.power[best] < 3.0 * median;
  return est;
}

HrMetrics hr_metrics(std::span<const double> pred, std::span<const double> gt) {
  check_lengths(pred.size(), gt.size());
  if (pred.empty()) throw Error(ErrorCode::LengthMismatch, "metrics need at least one pair");
  const double n = static_cast<double>(pred.size());
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - gt[i];
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  HrMetrics m;
  m.mae = abs_sum / n;
  m.rmse = std::sqrt(sq_sum / n);
  if (pred.size() >= 2) {
    const double mp = mean_value(pred), mg = mean_value(gt);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      sxy += (pred[i] - mp) * (gt[i] - mg);
      sxx += (pred[i] - mp) * (pred[i] - mp);
      syy += (gt[i] - mg) * (gt[i] - mg);
    }
    if (sxx > 0.0 && syy > 0.0) {
      m.pearson_r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    }
  }
  return m;
}

double smooth_l1(std::span<const double> pred, std::span<const double> gt, double beta) {
  check_lengths(pred.size(), gt.size());
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be > 0");
  if (pred.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = std::abs(pred[i] - gt[i]);
    acc += d < beta ? 0.5 * d * d / beta : d - 0.5 * beta;
  }
  return acc / static_cast<double>(pred.size());
}

double smooth_l1(const PpgTrace& pred, const PpgTrace& gt, double beta) {
  return smooth_l1(pred.samples(), gt.samples(), beta);
}

std::vector<double> smooth_l1_grad(std::span<const double> pred, std::span<const double> gt,
                                   double beta) {
  check_lengths(pred.size(), gt.size());
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be > 0");
  std::vector<double> g(pred.size());
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - gt[i];
    const double local = std::abs(d) < beta ? d / beta : (d > 0 ? 1.0 : -1.0);
    g[i] = local / n;
  }
  return g;
}

std::vector<double> windowed_hr(const PpgTrace& signal, std::size_t window, std::size_t stride,
                                double lo_hz, double hi_hz) {
  if (window == 0 || window >= signal.size()) {
    return {estimate_hr(signal, lo_hz, hi_hz).bpm};
  }
  if (stride == 0) throw Error(ErrorCode::InvalidArgument, "stride must be >= 1");
  std::vector<double> out;
  const auto& v = signal.values();
  for (std::size_t start = 0; start + window <= v.size(); start += stride) {
    PpgTrace w({v.begin() + static_cast<std::ptrdiff_t>(start),
                v.begin() + static_cast<std::ptrdiff_t>(start + window)},
               signal.fs(), signal.t0() + static_cast<double>(start) / signal.fs());
    out.push_back(estimate_hr(w, lo_hz, hi_hz).bpm);
  }
  return out;
}

double mean_value(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

HrReport make_report(std::vector<VideoHr> videos) {
  HrReport report;
  std::vector<double> pred, gt;
  for (const auto& v : videos) {
    pred.push_back(v.video_hr);
    gt.push_back(v.gt_hr);
  }
  const auto m = hr_metrics(pred, gt);
  report.per_video = std::move(videos);
  report.mae = m.mae;
  report.rmse = m.rmse;
  report.pearson_r = m.pearson_r;
  return report;
}

}  // namespace rppg
