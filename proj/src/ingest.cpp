#include "rppg/ingest.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace rppg {

using nlohmann::json;

namespace {

std::string lowercase_ext(const fs::path& p) {
  auto e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Frame read_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::DecodeFailure, "cannot decode " + path.string() + ": " + msg);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, data.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::DecodeFailure, "cannot decode " + path.string() + ": " + msg);
  }
  return Frame(static_cast<int>(image.height), static_cast<int>(image.width), std::move(data));
}

void write_png(const fs::path& path, const Frame& frame) {
  ensure_parent(path);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width());
  image.height = static_cast<png_uint_32>(frame.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, frame.data().data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::Io, "cannot write " + path.string() + ": " + msg);
  }
}

std::vector<fs::path> list_frame_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::MissingDir, "frame directory " + dir.string() + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && lowercase_ext(e.path()) == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

Clip load_frames(const fs::path& dir, double fps) {
  const auto files = list_frame_files(dir);
  if (files.empty()) throw Error(ErrorCode::EmptyClip, "no frames in " + dir.string());
  Clip clip;
  clip.fps = fps;
  clip.source_id = dir.parent_path().filename().string();
  clip.frames.reserve(files.size());
  for (const auto& f : files) {
    clip.frames.push_back(read_png(f));
    if (!clip.frames.back().same_shape(clip.frames.front())) {
      throw Error(ErrorCode::ShapeMismatch, f.string() + " differs in size from " +
                                                files.front().filename().string());
    }
  }
  return validate_clip(clip);
}

void write_frames(const fs::path& dir, const Clip& clip) {
  validate_clip(clip);
  fs::create_directories(dir);
  char name[32];
  for (std::size_t i = 0; i < clip.size(); ++i) {
    std::snprintf(name, sizeof name, "%06zu.png", i);
    write_png(dir / name, clip.frames[i]);
  }
}

std::vector<LandmarkSet> load_landmarks(const fs::path& path,
                                        std::optional<std::size_t> expected_frames) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open landmark file " + path.string());
  std::vector<LandmarkSet> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::DecodeFailure,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!rec.contains("points") || !rec["points"].is_array()) {
      throw Error(ErrorCode::DecodeFailure,
                  path.string() + ":" + std::to_string(lineno) + ": missing points array");
    }
    std::vector<Point2> pts;
    for (const auto& p : rec["points"]) {
      if (!p.is_array() || p.size() != 2) {
        throw Error(ErrorCode::DecodeFailure,
                    path.string() + ":" + std::to_string(lineno) + ": point is not [x,y]");
      }
      pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    const int frame = rec.value("frame", static_cast<int>(out.size()));
    out.emplace_back(std::move(pts), frame);
  }
  std::stable_sort(out.begin(), out.end(), [](const LandmarkSet& a, const LandmarkSet& b) {
    return a.frame_index() < b.frame_index();
  });
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].frame_index() != static_cast<int>(i)) {
      throw Error(ErrorCode::FrameCountMismatch,
                  path.string() + ": landmark frame indices are not 0..t-1");
    }
  }
  if (expected_frames && out.size() != *expected_frames) {
    throw Error(ErrorCode::FrameCountMismatch,
                path.string() + " has " + std::to_string(out.size()) + " records for " +
                    std::to_string(*expected_frames) + " frames");
  }
  return out;
}

void write_landmarks(const fs::path& path, const std::vector<LandmarkSet>& landmarks) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& lm : landmarks) {
    json pts = json::array();
    for (const auto& p : lm.points()) pts.push_back({p.x, p.y});
    out << json{{"frame", lm.frame_index()}, {"points", pts}}.dump() << '\n';
  }
}

PpgTrace load_ppg_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open PPG file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::DecodeFailure, path.string() + " is empty");
  if (line.rfind("t_s,value", 0) != 0) {
    throw Error(ErrorCode::DecodeFailure, path.string() + ": expected header t_s,value");
  }
  std::vector<double> t, v;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("no comma");
      t.push_back(std::stod(line.substr(0, comma)));
      v.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::DecodeFailure,
                  path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  if (v.size() < 2) throw Error(ErrorCode::TooShort, path.string() + " has fewer than 2 samples");
  const double span = t.back() - t.front();
  if (!(span > 0.0)) throw Error(ErrorCode::DecodeFailure, path.string() + ": timestamps not increasing");
  const double fs = static_cast<double>(v.size() - 1) / span;
  return PpgTrace(std::move(v), fs, t.front());
}

void write_ppg_csv(const fs::path& path, const PpgTrace& trace) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "t_s,value\n";
  const auto s = trace.samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = trace.t0() + static_cast<double>(i) / trace.fs();
    out << format_double(t) << ',' << format_double(s[i]) << '\n';
  }
}

std::optional<double> load_manifest_fps(const fs::path& video_dir) {
  const auto path = video_dir / "manifest.json";
  if (!fs::exists(path)) return std::nullopt;
  std::ifstream in(path);
  try {
    const auto j = json::parse(in);
    if (j.contains("fps")) return j["fps"].get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DecodeFailure, path.string() + ": " + e.what());
  }
  return std::nullopt;
}

void write_manifest(const fs::path& video_dir, double fps) {
  fs::create_directories(video_dir);
  std::ofstream out(video_dir / "manifest.json");
  out << json{{"fps", fps}}.dump() << '\n';
}

PpgTrace align_ppg(const PpgTrace& ppg, double fps, std::size_t t) {
  if (!(fps > 0.0)) throw Error(ErrorCode::NonPositiveFps, "fps must be > 0");
  if (ppg.size() == 0) throw Error(ErrorCode::InsufficientCoverage, "empty PPG trace");
  const auto s = ppg.samples();
  const double last = static_cast<double>(s.size() - 1);
  constexpr double kSnap = 1e-9;
  std::vector<double> out(t);
  for (std::size_t i = 0; i < t; ++i) {
    // position in sample units; i * fs / fps is exact for integer rate ratios
    double pos = static_cast<double>(i) * ppg.fs() / fps - ppg.t0() * ppg.fs();
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) < kSnap) pos = nearest;
    if (pos < -kSnap || pos > last + kSnap) {
      throw Error(ErrorCode::InsufficientCoverage,
                  "frame " + std::to_string(i) + " at " + std::to_string(i / fps) +
                      " s lies outside the PPG span");
    }
    pos = std::clamp(pos, 0.0, last);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    out[i] = frac == 0.0 ? s[lo] : s[lo] * (1.0 - frac) + s[lo + 1] * frac;
  }
  return PpgTrace(std::move(out), fps, 0.0);
}

std::size_t window_count(std::size_t t, std::size_t window, std::size_t stride) {
  if (window == 0 || stride == 0 || t < window) return 0;
  return (t - window) / stride + 1;
}

std::vector<ClipWindow> window_clips(const Clip& clip, const PpgTrace& gt, std::size_t window,
                                     std::size_t stride) {
  validate_clip(clip);
  if (window == 0 || stride == 0) {
    throw Error(ErrorCode::InvalidArgument, "window and stride must be >= 1");
  }
  if (gt.size() != clip.size()) {
    throw Error(ErrorCode::LengthMismatch, "ground truth has " + std::to_string(gt.size()) +
                                               " samples for " + std::to_string(clip.size()) +
                                               " frames");
  }
  if (clip.size() < window) {
    throw Error(ErrorCode::ClipTooShort, "clip of " + std::to_string(clip.size()) +
                                             " frames is shorter than the window of " +
                                             std::to_string(window));
  }
  const std::size_t count = window_count(clip.size(), window, stride);
  std::vector<ClipWindow> out;
  out.reserve(count);
  const auto& g = gt.values();
  for (std::size_t w = 0; w < count; ++w) {
    const std::size_t start = w * stride;
    Clip c;
    c.fps = clip.fps;
    c.source_id = clip.source_id;
    c.window_index = static_cast<int>(w);
    c.frames.assign(clip.frames.begin() + static_cast<std::ptrdiff_t>(start),
                    clip.frames.begin() + static_cast<std::ptrdiff_t>(start + window));
    PpgTrace trace({g.begin() + static_cast<std::ptrdiff_t>(start),
                    g.begin() + static_cast<std::ptrdiff_t>(start + window)},
                   gt.fs(), gt.t0() + static_cast<double>(start) / gt.fs());
    out.push_back({std::move(c), std::move(trace), start});
  }
  return out;
}

bool is_video_dir(const fs::path& dir) {
  return fs::is_directory(dir / "frames") || fs::is_directory(dir / "clips") ||
         fs::is_regular_file(dir / "clip.rppgclip");
}

std::vector<DatasetEntry> discover_videos(const fs::path& root, std::optional<double> default_fps) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::MissingDir, "directory " + root.string() + " does not exist");
  }
  std::vector<fs::path> dirs;
  if (is_video_dir(root)) {
    dirs.push_back(root);
  } else {
    for (const auto& e : fs::directory_iterator(root)) {
      if (e.is_directory() && is_video_dir(e.path())) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
  }
  if (dirs.empty()) {
    throw Error(ErrorCode::MissingDir, "no video directories under " + root.string());
  }
  std::vector<DatasetEntry> out;
  for (const auto& d : dirs) {
    DatasetEntry e;
    e.dir = d;
    e.video_id = fs::absolute(d).lexically_normal().filename().string();
    if (e.video_id.empty()) e.video_id = fs::absolute(d).lexically_normal().parent_path().filename().string();
    e.frames_dir = d / "frames";
    if (fs::exists(d / "landmarks.jsonl")) e.landmarks = d / "landmarks.jsonl";
    if (fs::exists(d / "ppg.csv")) e.ppg = d / "ppg.csv";
    const auto fps = load_manifest_fps(d);
    if (fps) {
      e.fps = *fps;
    } else if (default_fps) {
      e.fps = *default_fps;
    } else {
      throw Error(ErrorCode::Usage, d.string() + " has no manifest.json; pass --fps");
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace rppg
