#include "rppg/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

namespace rppg {

namespace {

using cplx = std::complex<double>;

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(std::span<const double> v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

void center(std::vector<double>& v) {
  const double m = mean_of(v);
  for (auto& x : v) x -= m;
}

// Coefficients of prod (x - r), highest power first.
std::vector<cplx> poly_from_roots(const std::vector<cplx>& roots) {
  std::vector<cplx> c{1.0};
  for (const auto& r : roots) {
    std::vector<cplx> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= c[i] * r;
    }
    c = std::move(next);
  }
  return c;
}

std::vector<double> lfilter(const IirCoefficients& coef, std::span<const double> x,
                            std::vector<double> state) {
  const auto& b = coef.b;
  const auto& a = coef.a;
  const std::size_t order = b.size() - 1;
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double yn = b[0] * x[n] + state[0];
    for (std::size_t i = 0; i + 1 < order; ++i) {
      state[i] = b[i + 1] * x[n] + state[i + 1] - a[i + 1] * yn;
    }
    state[order - 1] = b[order] * x[n] - a[order] * yn;
    y[n] = yn;
  }
  return y;
}

// Steady-state initial conditions for a unit step input.
std::vector<double> lfilter_zi(const IirCoefficients& coef) {
  const auto& b = coef.b;
  const auto& a = coef.a;
  const int m = static_cast<int>(b.size()) - 1;
  Eigen::MatrixXd i_minus_a = Eigen::MatrixXd::Identity(m, m);
  for (int r = 0; r < m; ++r) {
    i_minus_a(r, 0) += a[r + 1];
    if (r + 1 < m) i_minus_a(r, r + 1) -= 1.0;
  }
  Eigen::VectorXd rhs(m);
  for (int r = 0; r < m; ++r) rhs(r) = b[r + 1] - a[r + 1] * b[0];
  const Eigen::VectorXd zi = i_minus_a.colPivHouseholderQr().solve(rhs);
  return {zi.data(), zi.data() + m};
}

std::vector<double> scaled(const std::vector<double>& v, double s) {
  std::vector<double> out(v);
  for (auto& x : out) x *= s;
  return out;
}

}  // namespace

RgbTraces mean_traces(const Clip& clip) {
  validate_clip(clip);
  RgbTraces t;
  t.fps = clip.fps;
  for (const auto& f : clip.frames) {
    std::array<std::uint64_t, kChannels> sum{};
    const auto d = f.data();
    for (std::size_t i = 0; i < d.size(); i += kChannels) {
      sum[0] += d[i];
      sum[1] += d[i + 1];
      sum[2] += d[i + 2];
    }
    const double n = static_cast<double>(f.pixel_count());
    t.r.push_back(static_cast<double>(sum[0]) / n);
    t.g.push_back(static_cast<double>(sum[1]) / n);
    t.b.push_back(static_cast<double>(sum[2]) / n);
  }
  return t;
}

RgbTraces mean_traces(const ClipF& clip) {
  validate_clip(clip);
  RgbTraces t;
  t.fps = clip.fps;
  for (const auto& f : clip.frames) {
    std::array<double, kChannels> sum{};
    const auto d = f.data();
    for (std::size_t i = 0; i < d.size(); i += kChannels) {
      sum[0] += d[i];
      sum[1] += d[i + 1];
      sum[2] += d[i + 2];
    }
    const double n = static_cast<double>(f.pixel_count());
    t.r.push_back(sum[0] / n);
    t.g.push_back(sum[1] / n);
    t.b.push_back(sum[2] / n);
  }
  return t;
}

IirCoefficients butter_bandpass(int order, double lo_hz, double hi_hz, double fs) {
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "filter order must be >= 1");
  if (!(fs > 2.0 * hi_hz)) {
    throw Error(ErrorCode::FsTooLow, "sampling rate " + std::to_string(fs) +
                                         " Hz must exceed twice the upper band edge");
  }
  if (!(lo_hz > 0.0 && lo_hz < hi_hz)) {
    throw Error(ErrorCode::InvalidArgument, "band edges must satisfy 0 < lo < hi");
  }
  const double fs2 = 2.0 * fs;
  const double wl = fs2 * std::tan(std::numbers::pi * lo_hz / fs);
  const double wh = fs2 * std::tan(std::numbers::pi * hi_hz / fs);
  const double bw = wh - wl;
  const double wo = std::sqrt(wl * wh);

  // Analog low-pass prototype, then low-pass -> band-pass.
  std::vector<cplx> poles;
  for (int m = -order + 1; m < order; m += 2) {
    const cplx p = -std::exp(cplx(0.0, std::numbers::pi * m / (2.0 * order)));
    const cplx half = p * bw / 2.0;
    const cplx disc = std::sqrt(half * half - wo * wo);
    poles.push_back(half + disc);
    poles.push_back(half - disc);
  }
  std::vector<cplx> zeros(order, 0.0);
  double gain = std::pow(bw, order);

  // Bilinear transform.
  cplx num = 1.0, den = 1.0;
  for (const auto& z : zeros) num *= fs2 - z;
  for (const auto& p : poles) den *= fs2 - p;
  gain *= (num / den).real();
  std::vector<cplx> zd, pd;
  for (const auto& z : zeros) zd.push_back((fs2 + z) / (fs2 - z));
  for (const auto& p : poles) pd.push_back((fs2 + p) / (fs2 - p));
  while (zd.size() < pd.size()) zd.push_back(-1.0);

  IirCoefficients coef;
  for (const auto& c : poly_from_roots(zd)) coef.b.push_back(gain * c.real());
  for (const auto& c : poly_from_roots(pd)) coef.a.push_back(c.real());
  return coef;
}

std::vector<double> filtfilt(const IirCoefficients& coef, std::span<const double> x) {
  const std::size_t pad = 3 * std::max(coef.a.size(), coef.b.size());
  if (x.size() <= pad) {
    throw Error(ErrorCode::TooShort, "signal of " + std::to_string(x.size()) +
                                         " samples is too short to filter (need > " +
                                         std::to_string(pad) + ")");
  }
  const std::size_t n = x.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = lfilter_zi(coef);
  auto fwd = lfilter(coef, ext, scaled(zi, ext.front()));
  std::reverse(fwd.begin(), fwd.end());
  auto bwd = lfilter(coef, fwd, scaled(zi, fwd.front()));
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + static_cast<std::ptrdiff_t>(pad),
          bwd.end() - static_cast<std::ptrdiff_t>(pad)};
}

PpgTrace bandpass(const PpgTrace& signal, double lo_hz, double hi_hz) {
  const auto coef = butter_bandpass(2, lo_hz, hi_hz, signal.fs());
  return PpgTrace(filtfilt(coef, signal.samples()), signal.fs(), signal.t0());
}

namespace {

void check_traces(const RgbTraces& t) {
  if (t.r.size() != t.g.size() || t.r.size() != t.b.size()) {
    throw Error(ErrorCode::LengthMismatch, "RGB traces have unequal lengths");
  }
  if (!(t.fps > 0.0)) throw Error(ErrorCode::NonPositiveFps, "trace fps must be > 0");
}

std::vector<double> normalized(std::span<const double> v, const char* channel) {
  const double m = mean_of(v);
  if (!(m > 0.0)) {
    throw Error(ErrorCode::ZeroChannel, std::string(channel) + " channel mean is zero");
  }
  std::vector<double> out(v.begin(), v.end());
  for (auto& x : out) x /= m;
  return out;
}

double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

PpgTrace chrom(const RgbTraces& t) {
  check_traces(t);
  if (t.size() < kChromMinFrames) {
    throw Error(ErrorCode::TooShort, "CHROM needs at least 64 frames, got " +
                                         std::to_string(t.size()));
  }
  const auto rn = normalized(t.r, "red");
  const auto gn = normalized(t.g, "green");
  const auto bn = normalized(t.b, "blue");
  const std::size_t n = t.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 3.0 * rn[i] - 2.0 * gn[i];
    y[i] = 1.5 * rn[i] + gn[i] - 1.5 * bn[i];
  }
  const auto coef = butter_bandpass(2, kBandLoHz, kBandHiHz, t.fps);
  const auto xf = filtfilt(coef, x);
  const auto yf = filtfilt(coef, y);
  const double alpha = ratio_or_zero(stddev_of(xf), stddev_of(yf));
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = xf[i] - alpha * yf[i];
  center(s);
  return PpgTrace(std::move(s), t.fps);
}

PpgTrace chrom(const Clip& clip) { return chrom(mean_traces(clip)); }
PpgTrace chrom(const ClipF& clip) { return chrom(mean_traces(clip)); }

std::size_t pos_window(double fps) {
  return static_cast<std::size_t>(std::ceil(1.6 * fps));
}

PpgTrace pos(const RgbTraces& t) {
  check_traces(t);
  const std::size_t n = t.size();
  const std::size_t l = pos_window(t.fps);
  if (l < 2 || n < l) {
    throw Error(ErrorCode::TooShort, "POS needs at least " + std::to_string(l) +
                                         " frames, got " + std::to_string(n));
  }
  std::vector<double> out(n, 0.0);
  std::vector<double> s1(l), s2(l), h(l);
  for (std::size_t m = 0; m + l <= n; ++m) {
    const std::span<const double> r(t.r.data() + m, l), g(t.g.data() + m, l),
        b(t.b.data() + m, l);
    const auto rn = normalized(r, "red");
    const auto gn = normalized(g, "green");
    const auto bn = normalized(b, "blue");
    for (std::size_t i = 0; i < l; ++i) {
      s1[i] = gn[i] - bn[i];
      s2[i] = gn[i] + bn[i] - 2.0 * rn[i];
    }
    const double alpha = ratio_or_zero(stddev_of(s1), stddev_of(s2));
    for (std::size_t i = 0; i < l; ++i) h[i] = s1[i] + alpha * s2[i];
    center(h);
    for (std::size_t i = 0; i < l; ++i) out[m + i] += h[i];
  }
  return PpgTrace(std::move(out), t.fps);
}

PpgTrace pos(const Clip& clip) { return pos(mean_traces(clip)); }
PpgTrace pos(const ClipF& clip) { return pos(mean_traces(clip)); }

Estimator parse_estimator(std::string_view name) {
  if (name == "chrom") return Estimator::Chrom;
  if (name == "pos") return Estimator::Pos;
  throw Error(ErrorCode::Usage, "unknown estimator '" + std::string(name) + "'");
}

std::string_view estimator_name(Estimator e) {
  return e == Estimator::Chrom ? "chrom" : "pos";
}

PpgTrace estimate_signal(Estimator e, const RgbTraces& traces) {
  return e == Estimator::Chrom ? chrom(traces) : pos(traces);
}

}  // namespace rppg
