#include "rppg/roi.hpp"

#include <algorithm>
#include <cmath>

#include "rppg/parallel.hpp"

namespace rppg {

namespace {

// Source coordinate and blend weight for each destination index.
struct Tap {
  int lo;
  int hi;
  double frac;
};

std::vector<Tap> resample_taps(int in, int out) {
  std::vector<Tap> taps(out);
  for (int i = 0; i < out; ++i) {
    const double s = out == 1 ? (in - 1) / 2.0
                              : static_cast<double>(i) * (in - 1) / (out - 1);
    int lo = static_cast<int>(std::floor(s));
    lo = std::clamp(lo, 0, in - 1);
    const int hi = std::min(lo + 1, in - 1);
    taps[i] = {lo, hi, s - lo};
  }
  return taps;
}

PixelRect make_rect(double xa, double xb, double ya, double yb, int height, int width,
                    const char* name) {
  const int x0 = std::clamp(static_cast<int>(std::floor(std::min(xa, xb))), 0, width - 1);
  const int x1 = std::clamp(static_cast<int>(std::ceil(std::max(xa, xb))), 0, width - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(std::min(ya, yb))), 0, height - 1);
  const int y1 = std::clamp(static_cast<int>(std::ceil(std::max(ya, yb))), 0, height - 1);
  PixelRect r{x0, y0, x1, y1};
  if (r.width() < 2 || r.height() < 2) {
    throw Error(ErrorCode::DegenerateRegion,
                std::string(name) + " region is " + std::to_string(r.width()) + "x" +
                    std::to_string(r.height()) + " px after clamping");
  }
  return r;
}

Frame concat_horizontal(const Frame& left, const Frame& right) {
  Frame out(left.height(), left.width() + right.width());
  for (int y = 0; y < out.height(); ++y) {
    std::copy_n(&left.at(y, 0, 0), static_cast<std::size_t>(left.width()) * kChannels,
                &out.at(y, 0, 0));
    std::copy_n(&right.at(y, 0, 0), static_cast<std::size_t>(right.width()) * kChannels,
                &out.at(y, left.width(), 0));
  }
  return out;
}

Frame concat_vertical(const Frame& top, const Frame& bottom) {
  std::vector<std::uint8_t> data(top.data().begin(), top.data().end());
  data.insert(data.end(), bottom.data().begin(), bottom.data().end());
  return Frame(top.height() + bottom.height(), top.width(), std::move(data));
}

}  // namespace

Frame bilinear_resize(const Frame& img, int out_h, int out_w) {
  if (img.empty()) throw Error(ErrorCode::EmptyInput, "cannot resize an empty image");
  if (out_h < 1 || out_w < 1) {
    throw Error(ErrorCode::InvalidArgument, "resize target must be at least 1x1");
  }
  if (out_h == img.height() && out_w == img.width()) return img;
  const auto ty = resample_taps(img.height(), out_h);
  const auto tx = resample_taps(img.width(), out_w);
  Frame out(out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    const auto& a = ty[y];
    for (int x = 0; x < out_w; ++x) {
      const auto& b = tx[x];
      for (int c = 0; c < kChannels; ++c) {
        const double top = img.at(a.lo, b.lo, c) * (1.0 - b.frac) + img.at(a.lo, b.hi, c) * b.frac;
        const double bot = img.at(a.hi, b.lo, c) * (1.0 - b.frac) + img.at(a.hi, b.hi, c) * b.frac;
        const double v = top * (1.0 - a.frac) + bot * a.frac;
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

RegionRects region_rects(const LandmarkSet& lm, int height, int width) {
  const double cheek_top = lm[29].y;
  const double cheek_bottom = lm[33].y;
  RegionRects rects;
  rects.cheek_a = make_rect(lm[1].x, lm[31].x, cheek_top, cheek_bottom, height, width, "cheek_a");
  rects.cheek_b = make_rect(lm[35].x, lm[15].x, cheek_top, cheek_bottom, height, width, "cheek_b");
  double brow_min = lm[17].y;
  for (int i = 18; i <= 26; ++i) brow_min = std::min(brow_min, lm[i].y);
  const double bottom = brow_min - 2.0;
  const double top = bottom - 0.6 * (lm[33].y - lm[27].y);
  rects.forehead = make_rect(lm[19].x, lm[24].x, top, bottom, height, width, "forehead");
  return rects;
}

Frame crop(const Frame& frame, const PixelRect& rect) {
  if (rect.x0 < 0 || rect.y0 < 0 || rect.x1 >= frame.width() || rect.y1 >= frame.height() ||
      rect.width() < 1 || rect.height() < 1) {
    throw Error(ErrorCode::DegenerateRegion, "crop rectangle outside frame");
  }
  Frame out(rect.height(), rect.width());
  for (int y = 0; y < rect.height(); ++y) {
    std::copy_n(&frame.at(rect.y0 + y, rect.x0, 0),
                static_cast<std::size_t>(rect.width()) * kChannels, &out.at(y, 0, 0));
  }
  return out;
}

Regions extract_regions(const Frame& frame, const LandmarkSet& lm) {
  if (frame.empty()) throw Error(ErrorCode::EmptyInput, "empty frame");
  const auto rects = region_rects(lm, frame.height(), frame.width());
  return {crop(frame, rects.cheek_a), crop(frame, rects.cheek_b), crop(frame, rects.forehead)};
}

Frame assemble_roi(const Regions& regions) {
  for (const Frame* f : {&regions.cheek_a, &regions.cheek_b, &regions.forehead}) {
    if (f->height() < 2 || f->width() < 2) {
      throw Error(ErrorCode::DegenerateRegion, "region smaller than 2x2");
    }
  }
  const int h = std::min(regions.cheek_a.height(), regions.cheek_b.height());
  const Frame a = bilinear_resize(regions.cheek_a, h, regions.cheek_a.width());
  const Frame b = bilinear_resize(regions.cheek_b, h, regions.cheek_b.width());
  const Frame cheeks = concat_horizontal(a, b);
  const Frame forehead =
      bilinear_resize(regions.forehead, regions.forehead.height(), cheeks.width());
  return bilinear_resize(concat_vertical(forehead, cheeks), kRoiSize, kRoiSize);
}

Clip roi_clip(const Clip& clip, std::span<const LandmarkSet> landmarks, int jobs) {
  validate_clip(clip);
  if (landmarks.size() != clip.size()) {
    throw Error(ErrorCode::FrameCountMismatch,
                std::to_string(landmarks.size()) + " landmark records for " +
                    std::to_string(clip.size()) + " frames");
  }
  Clip out;
  out.fps = clip.fps;
  out.source_id = clip.source_id;
  out.window_index = clip.window_index;
  out.frames.resize(clip.size());
  parallel_for(clip.size(), jobs, [&](std::size_t i) {
    out.frames[i] = assemble_roi(extract_regions(clip.frames[i], landmarks[i]));
  });
  return out;
}

}  // namespace rppg
