#include "rppg/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rppg {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage: return "usage";
    case ErrorCode::ShapeMismatch: return "shape_mismatch";
    case ErrorCode::EmptyClip: return "empty_clip";
    case ErrorCode::NonPositiveFps: return "non_positive_fps";
    case ErrorCode::MissingDir: return "missing_dir";
    case ErrorCode::DecodeFailure: return "decode_failure";
    case ErrorCode::Io: return "io";
    case ErrorCode::WrongPointCount: return "wrong_point_count";
    case ErrorCode::FrameCountMismatch: return "frame_count_mismatch";
    case ErrorCode::InsufficientCoverage: return "insufficient_coverage";
    case ErrorCode::ClipTooShort: return "clip_too_short";
    case ErrorCode::EmptyInput: return "empty_input";
    case ErrorCode::DegenerateRegion: return "degenerate_region";
    case ErrorCode::SizeMismatch: return "size_mismatch";
    case ErrorCode::BadPatchSize: return "bad_patch_size";
    case ErrorCode::BadKernel: return "bad_kernel";
    case ErrorCode::BadDims: return "bad_dims";
    case ErrorCode::LengthMismatch: return "length_mismatch";
    case ErrorCode::FsTooLow: return "fs_too_low";
    case ErrorCode::TooShort: return "too_short";
    case ErrorCode::HrOutOfRange: return "hr_out_of_range";
    case ErrorCode::RangeViolation: return "range_violation";
    case ErrorCode::InvalidKey: return "invalid_key";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::ZeroChannel: return "zero_channel";
    case ErrorCode::ZeroVariance: return "zero_variance";
  }
  return "unknown";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage:
    case ErrorCode::InvalidArgument:
      return 2;
    case ErrorCode::ZeroChannel:
    case ErrorCode::ZeroVariance:
      return 4;
    default:
      return 3;
  }
}

LandmarkSet::LandmarkSet(std::vector<Point2> points, int frame_index)
    : frame_index_(frame_index) {
  if (points.size() != kLandmarkCount) {
    throw Error(ErrorCode::WrongPointCount,
                "landmark record for frame " + std::to_string(frame_index) + " has " +
                    std::to_string(points.size()) + " points, expected 68");
  }
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::InvalidArgument, "non-finite landmark coordinate");
    }
  }
  std::copy(points.begin(), points.end(), points_.begin());
}

bool LandmarkSet::in_bounds(int height, int width) const noexcept {
  return std::all_of(points_.begin(), points_.end(), [&](const Point2& p) {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= width - 1 && p.y <= height - 1;
  });
}

PermutationKey::PermutationKey(std::vector<std::uint32_t> perm, Provenance provenance)
    : perm_(std::move(perm)), provenance_(std::move(provenance)) {
  if (perm_.empty()) throw Error(ErrorCode::InvalidKey, "permutation key must have n >= 1");
  std::vector<bool> seen(perm_.size(), false);
  for (auto v : perm_) {
    if (v >= perm_.size() || seen[v]) {
      throw Error(ErrorCode::InvalidKey, "permutation key is not a bijection");
    }
    seen[v] = true;
  }
}

PermutationKey PermutationKey::identity(std::size_t n) {
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  return PermutationKey(std::move(perm));
}

bool PermutationKey::is_identity() const noexcept {
  for (std::size_t i = 0; i < perm_.size(); ++i) {
    if (perm_[i] != i) return false;
  }
  return true;
}

PermutationKey PermutationKey::inverse() const {
  std::vector<std::uint32_t> inv(perm_.size());
  for (std::size_t i = 0; i < perm_.size(); ++i) inv[perm_[i]] = static_cast<std::uint32_t>(i);
  return PermutationKey(std::move(inv));
}

PpgTrace::PpgTrace(std::vector<double> samples, double fs, double t0)
    : samples_(std::move(samples)), fs_(fs), t0_(t0) {
  if (!(fs_ > 0.0) || !std::isfinite(fs_)) {
    throw Error(ErrorCode::NonPositiveFps, "trace sampling rate must be > 0");
  }
  if (!std::isfinite(t0_)) throw Error(ErrorCode::InvalidArgument, "trace t0 must be finite");
  for (double v : samples_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "trace holds non-finite value");
  }
}

void KeyPolicy::validate() const {
  if (mode == KeyMode::Pool && pool_size < 1) {
    throw Error(ErrorCode::InvalidArgument, "key pool size must be >= 1");
  }
}

void PerturbSpec::validate() const {
  if (patch_size < 1 || kRoiSize % patch_size != 0) {
    throw Error(ErrorCode::BadPatchSize,
                "patch size " + std::to_string(patch_size) + " does not divide 64");
  }
  if (blur_kernel && (*blur_kernel < 3 || *blur_kernel % 2 == 0)) {
    throw Error(ErrorCode::BadKernel, "blur kernel must be odd and >= 3");
  }
  if (noise_variance < 0.0) throw Error(ErrorCode::InvalidArgument, "noise variance must be >= 0");
  if (instahide_k != 2) {
    throw Error(ErrorCode::InvalidArgument, "only k=2 InstaHide mixing is supported");
  }
  key_policy.validate();
}

std::string method_name(const PerturbSpec& spec) {
  switch (spec.method) {
    case PerturbMethod::Roi: return "roi";
    case PerturbMethod::RoiShuffle: return "roi+sh";
    case PerturbMethod::RoiShuffleBlur: return "roi+sh+b";
    case PerturbMethod::RoiShufflePatch: return "patch:" + std::to_string(spec.patch_size);
    case PerturbMethod::Noise: return "noise";
    case PerturbMethod::Bdct: return "bdct";
    case PerturbMethod::Le: return "le";
    case PerturbMethod::InstaHide: return "instahide";
  }
  return "unknown";
}

PerturbSpec parse_method(std::string_view text) {
  PerturbSpec spec;
  spec.blur_kernel.reset();
  if (text == "roi") {
    spec.method = PerturbMethod::Roi;
  } else if (text == "roi+sh") {
    spec.method = PerturbMethod::RoiShuffle;
  } else if (text == "roi+sh+b") {
    spec.method = PerturbMethod::RoiShuffleBlur;
    spec.blur_kernel = 3;
  } else if (text.starts_with("patch:")) {
    spec.method = PerturbMethod::RoiShufflePatch;
    spec.blur_kernel = 3;
    const std::string p(text.substr(6));
    try {
      std::size_t used = 0;
      spec.patch_size = std::stoi(p, &used);
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Usage, "bad patch size in method '" + std::string(text) + "'");
    }
  } else if (text == "noise") {
    spec.method = PerturbMethod::Noise;
  } else if (text == "bdct") {
    spec.method = PerturbMethod::Bdct;
  } else if (text == "le") {
    spec.method = PerturbMethod::Le;
  } else if (text == "instahide") {
    spec.method = PerturbMethod::InstaHide;
  } else {
    throw Error(ErrorCode::Usage, "unknown method '" + std::string(text) + "'");
  }
  spec.validate();
  return spec;
}

}  // namespace rppg
