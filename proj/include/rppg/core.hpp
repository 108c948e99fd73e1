#pragma once

// Shared domain types. Pixel layout is row-major, channel-last, R,G,B.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rppg/error.hpp"

namespace rppg {

inline constexpr int kChannels = 3;
inline constexpr int kRoiSize = 64;
inline constexpr int kLandmarkCount = 68;

template <typename T>
class BasicFrame {
 public:
  using value_type = T;

  BasicFrame() = default;

  BasicFrame(int height, int width, T fill = T{}) : height_(height), width_(width) {
    if (height < 0 || width < 0) {
      throw Error(ErrorCode::ShapeMismatch, "frame dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
  }

  BasicFrame(int height, int width, std::vector<T> data)
      : height_(height), width_(width), data_(std::move(data)) {
    if (height < 0 || width < 0 ||
        data_.size() != static_cast<std::size_t>(height) * width * kChannels) {
      throw Error(ErrorCode::ShapeMismatch,
                  "frame data length " + std::to_string(data_.size()) + " != " +
                      std::to_string(height) + "x" + std::to_string(width) + "x3");
    }
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  static constexpr int channels() noexcept { return kChannels; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height_) * width_;
  }
  bool empty() const noexcept { return data_.empty(); }
  bool same_shape(const BasicFrame& o) const noexcept {
    return height_ == o.height_ && width_ == o.width_;
  }

  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }

  T& at(int y, int x, int c) noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }
  const T& at(int y, int x, int c) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }

  bool operator==(const BasicFrame&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

using Frame = BasicFrame<std::uint8_t>;
using FrameF = BasicFrame<float>;

template <typename T>
struct BasicClip {
  using value_type = T;

  std::vector<BasicFrame<T>> frames;
  double fps = 0.0;
  std::string source_id;
  std::optional<int> window_index;

  std::size_t size() const noexcept { return frames.size(); }
  int height() const noexcept { return frames.empty() ? 0 : frames.front().height(); }
  int width() const noexcept { return frames.empty() ? 0 : frames.front().width(); }

  bool operator==(const BasicClip&) const = default;
};

using Clip = BasicClip<std::uint8_t>;
using ClipF = BasicClip<float>;

/// A clip of either 8-bit or real-valued frames.
using AnyClip = std::variant<Clip, ClipF>;

/// Returns the clip unchanged if it has at least one frame, uniform frame
/// shape and positive fps; throws otherwise.
template <typename T>
const BasicClip<T>& validate_clip(const BasicClip<T>& clip) {
  if (clip.frames.empty()) throw Error(ErrorCode::EmptyClip, "clip has no frames");
  if (!(clip.fps > 0.0)) throw Error(ErrorCode::NonPositiveFps, "clip fps must be > 0");
  const auto& first = clip.frames.front();
  for (std::size_t i = 1; i < clip.frames.size(); ++i) {
    if (!clip.frames[i].same_shape(first)) {
      throw Error(ErrorCode::ShapeMismatch,
                  "frame " + std::to_string(i) + " is " +
                      std::to_string(clip.frames[i].height()) + "x" +
                      std::to_string(clip.frames[i].width()) + ", expected " +
                      std::to_string(first.height()) + "x" + std::to_string(first.width()));
    }
  }
  return clip;
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

/// 68 facial landmarks, 0-indexed iBUG-68 numbering (jaw 0-16, brows 17-26,
/// nose 27-35, eyes 36-47, mouth 48-67).
class LandmarkSet {
 public:
  LandmarkSet() = default;
  LandmarkSet(std::vector<Point2> points, int frame_index);

  const std::array<Point2, kLandmarkCount>& points() const noexcept { return points_; }
  const Point2& operator[](std::size_t i) const noexcept { return points_[i]; }
  int frame_index() const noexcept { return frame_index_; }

  /// True when every point lies inside a height x width frame.
  bool in_bounds(int height, int width) const noexcept;

 private:
  std::array<Point2, kLandmarkCount> points_{};
  int frame_index_ = 0;
};

inline constexpr const char* kKeyAlgorithm = "splitmix64-fisheryates-v1";

struct SeededProvenance {
  std::uint64_t seed = 0;
  std::string algorithm_id = kKeyAlgorithm;
  bool operator==(const SeededProvenance&) const = default;
};
struct ExplicitProvenance {
  bool operator==(const ExplicitProvenance&) const = default;
};

/// A bijection over [0, n). Construction rejects anything that is not a
/// permutation.
class PermutationKey {
 public:
  using Provenance = std::variant<ExplicitProvenance, SeededProvenance>;

  explicit PermutationKey(std::vector<std::uint32_t> perm, Provenance provenance = {});

  static PermutationKey identity(std::size_t n);

  std::size_t n() const noexcept { return perm_.size(); }
  std::span<const std::uint32_t> perm() const noexcept { return perm_; }
  std::uint32_t operator[](std::size_t i) const noexcept { return perm_[i]; }
  const Provenance& provenance() const noexcept { return provenance_; }
  bool is_identity() const noexcept;

  PermutationKey inverse() const;

  /// Same mapping, regardless of how the key was obtained.
  bool same_mapping(const PermutationKey& o) const noexcept { return perm_ == o.perm_; }
  bool operator==(const PermutationKey&) const = default;

 private:
  std::vector<std::uint32_t> perm_;
  Provenance provenance_;
};

/// Uniformly sampled scalar signal.
class PpgTrace {
 public:
  PpgTrace() = default;
  PpgTrace(std::vector<double> samples, double fs, double t0 = 0.0);

  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& values() const noexcept { return samples_; }
  double fs() const noexcept { return fs_; }
  double t0() const noexcept { return t0_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration() const noexcept {
    return samples_.empty() ? 0.0 : static_cast<double>(samples_.size() - 1) / fs_;
  }

 private:
  std::vector<double> samples_;
  double fs_ = 1.0;
  double t0_ = 0.0;
};

enum class PerturbMethod {
  Roi,
  RoiShuffle,
  RoiShuffleBlur,
  RoiShufflePatch,
  Noise,
  Bdct,
  Le,
  InstaHide,
};

enum class KeyMode { Fixed, Pool, Unbounded };

struct KeyPolicy {
  KeyMode mode = KeyMode::Unbounded;
  std::uint64_t master_seed = 0;
  std::uint64_t pool_size = 1;  // used when mode == Pool

  void validate() const;
};

struct PerturbSpec {
  PerturbMethod method = PerturbMethod::RoiShuffleBlur;
  int patch_size = 1;             // 1 = pixel level
  std::optional<int> blur_kernel = 3;
  KeyPolicy key_policy;
  double noise_variance = 0.5;    // normalized [0,1] intensity units
  int instahide_k = 2;

  void validate() const;
  bool uses_blur() const noexcept { return blur_kernel.has_value(); }
};

std::string method_name(const PerturbSpec& spec);

/// Parses the CLI spelling: roi | roi+sh | roi+sh+b | patch:P | noise | bdct | le | instahide.
PerturbSpec parse_method(std::string_view text);

struct VideoHr {
  std::string id;
  std::vector<double> per_window_hr;
  double video_hr = 0.0;
  double gt_hr = 0.0;
};

struct HrReport {
  std::vector<VideoHr> per_video;
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> pearson_r;
};

}  // namespace rppg
