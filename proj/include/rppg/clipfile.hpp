#pragma once

// RPPGCLIP binary interchange format:
//   "RPPGCLIP" | u16 version=1 | u8 dtype (0=u8, 1=f32) | u32 T,H,W,C | row-major data
// All integers and floats little-endian. A JSON sidecar carries fps, the key
// file and the aligned ground-truth PPG.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rppg/core.hpp"

namespace rppg {

inline constexpr char kClipMagic[8] = {'R', 'P', 'P', 'G', 'C', 'L', 'I', 'P'};
inline constexpr std::uint16_t kClipVersion = 1;

enum class ClipDtype : std::uint8_t { U8 = 0, F32 = 1 };

std::vector<std::uint8_t> encode_clip(const AnyClip& clip);
AnyClip decode_clip(std::span<const std::uint8_t> bytes, double fps);

void write_clipfile(const std::filesystem::path& path, const AnyClip& clip);
AnyClip read_clipfile(const std::filesystem::path& path, double fps);

struct ClipSidecar {
  double fps = 0.0;
  std::optional<std::string> key_file;
  std::vector<double> gt_ppg;
  std::optional<int> window_index;
  std::size_t start_frame = 0;
  std::string method;
};

void write_sidecar(const std::filesystem::path& path, const ClipSidecar& sidecar);
ClipSidecar read_sidecar(const std::filesystem::path& path);

}  // namespace rppg
