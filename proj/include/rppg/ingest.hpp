#pragma once

// Dataset loading, PPG alignment and windowing.
//
// Layout of one video directory:
//   <video>/frames/NNNNNN.png
//   <video>/landmarks.jsonl   {"frame":i,"points":[[x,y] x 68]} per line
//   <video>/ppg.csv           header t_s,value
//   <video>/manifest.json     {"fps":30}   (optional)

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rppg/core.hpp"

namespace rppg {

namespace fs = std::filesystem;

Frame read_png(const fs::path& path);
void write_png(const fs::path& path, const Frame& frame);

/// Image files of a directory in lexicographic filename order.
std::vector<fs::path> list_frame_files(const fs::path& dir);

/// Loads every frame in filename order. Errors name the offending file.
Clip load_frames(const fs::path& dir, double fps);

/// Writes frames as NNNNNN.png (zero-based, six digits).
void write_frames(const fs::path& dir, const Clip& clip);

/// expected_frames, when given, must equal the record count.
std::vector<LandmarkSet> load_landmarks(const fs::path& path,
                                        std::optional<std::size_t> expected_frames = {});
void write_landmarks(const fs::path& path, const std::vector<LandmarkSet>& landmarks);

/// Reads a t_s,value CSV; fs is inferred from the mean timestamp spacing.
PpgTrace load_ppg_csv(const fs::path& path);
void write_ppg_csv(const fs::path& path, const PpgTrace& trace);

std::optional<double> load_manifest_fps(const fs::path& video_dir);
void write_manifest(const fs::path& video_dir, double fps);

/// Linear interpolation of ppg at the frame timestamps i / fps, i in [0, t).
PpgTrace align_ppg(const PpgTrace& ppg, double fps, std::size_t t);

inline constexpr std::size_t kWindowFrames = 128;
inline constexpr std::size_t kWindowStride = 8;

/// floor((t - window) / stride) + 1, or 0 when t < window.
std::size_t window_count(std::size_t t, std::size_t window, std::size_t stride);

struct ClipWindow {
  Clip clip;
  PpgTrace gt;
  std::size_t start = 0;
};

/// Windows start at 0, stride, 2*stride, ...; incomplete tails are dropped.
std::vector<ClipWindow> window_clips(const Clip& clip, const PpgTrace& gt,
                                     std::size_t window = kWindowFrames,
                                     std::size_t stride = kWindowStride);

struct DatasetEntry {
  std::string video_id;
  fs::path dir;
  fs::path frames_dir;
  std::optional<fs::path> landmarks;
  std::optional<fs::path> ppg;
  double fps = 0.0;
};

/// Has frames/, clips/ or a clip.rppgclip file.
bool is_video_dir(const fs::path& dir);

/// A single video directory or a root of video directories (sorted by id).
/// fps falls back to `default_fps` when a manifest is absent.
std::vector<DatasetEntry> discover_videos(const fs::path& root,
                                          std::optional<double> default_fps = {});

}  // namespace rppg
