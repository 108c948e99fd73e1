#pragma once

// Composite cheek + forehead region image built from a frame and its landmarks.

#include "rppg/core.hpp"

namespace rppg {

/// Bilinear resampling with corner-aligned sample positions
/// (src = dst * (in - 1) / (out - 1)); results rounded and clamped to 8 bits.
Frame bilinear_resize(const Frame& img, int out_h, int out_w);

/// Inclusive pixel rectangle.
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int width() const noexcept { return x1 - x0 + 1; }
  int height() const noexcept { return y1 - y0 + 1; }
  bool operator==(const PixelRect&) const = default;
};

struct RegionRects {
  PixelRect cheek_a;
  PixelRect cheek_b;
  PixelRect forehead;
};

struct Regions {
  Frame cheek_a;
  Frame cheek_b;
  Frame forehead;
};

/// Rectangles for both cheeks and the forehead, clamped to a height x width
/// frame. Throws DegenerateRegion if any side ends up shorter than 2 px.
RegionRects region_rects(const LandmarkSet& lm, int height, int width);

Frame crop(const Frame& frame, const PixelRect& rect);

Regions extract_regions(const Frame& frame, const LandmarkSet& lm);

/// Cheeks side by side (taller one downsized to the shorter height), forehead
/// resized to that width and stacked on top, everything resized to 64x64.
Frame assemble_roi(const Regions& regions);

/// extract_regions + assemble_roi for every frame of a clip.
Clip roi_clip(const Clip& clip, std::span<const LandmarkSet> landmarks, int jobs = 1);

}  // namespace rppg
