#include "hapticdrone/render.hpp"

#include <cmath>
#include <cstdint>

namespace hapticdrone::sim {

PixelCoord world_to_pixel(double x, double y) noexcept {
  return {kCenterCol + static_cast<int>(std::lround(kPixelsPerMeter * x)),
          kCenterRow - static_cast<int>(std::lround(kPixelsPerMeter * y))};
}

Vec2 pixel_to_world(const PixelCoord& px) noexcept {
  return {(px.col - kCenterCol) / kPixelsPerMeter, (kCenterRow - px.row) / kPixelsPerMeter};
}

int meters_to_pixels(double meters) noexcept {
  return static_cast<int>(std::lround(kPixelsPerMeter * meters));
}

Rgb texture_color(Texture t) noexcept {
  switch (t) {
    case Texture::Food: return {40, 200, 40};
    case Texture::Plastic: return {40, 40, 220};
    case Texture::Other: return {150, 150, 150};
  }
  return {150, 150, 150};
}

Rgb dim(Rgb c) noexcept {
  return {static_cast<std::uint8_t>(c.r / 2), static_cast<std::uint8_t>(c.g / 2),
          static_cast<std::uint8_t>(c.b / 2)};
}

Rgb background_color(BackgroundStyle style, int col, int row) noexcept {
  switch (style) {
    case BackgroundStyle::Default: return {20, 20, 20};
    case BackgroundStyle::AltColor: return {70, 45, 90};
    case BackgroundStyle::Cluttered: {
      // 40 px checkerboard with a sparse grid of bright clutter marks.
      const bool dark = ((col / 40) + (row / 40)) % 2 == 0;
      if (col % 80 >= 36 && col % 80 < 44 && row % 80 >= 36 && row % 80 < 44) {
        return {200, 120, 30};
      }
      return dark ? Rgb{20, 20, 20} : Rgb{55, 45, 30};
    }
  }
  return {20, 20, 20};
}

bool sprite_covers(Shape shape, int r, int dc, int dr) noexcept {
  switch (shape) {
    case Shape::Cube: return std::abs(dc) <= r && std::abs(dr) <= r;
    case Shape::Sphere: return dc * dc + dr * dr <= r * r;
    case Shape::Cone: {
      // Upward triangle inscribed in the circle of radius r; rows grow downward.
      const auto half_width = static_cast<std::int64_t>(std::lround(r * std::sqrt(3.0) / 2.0));
      const auto bottom = static_cast<std::int64_t>(std::lround(r / 2.0));
      const std::int64_t top = -r;
      const std::int64_t x = dc;
      const std::int64_t y = dr;
      if (y < top || y > bottom) return false;
      // Inside both slanted edges from the apex (0, top) to (+-half_width, bottom).
      const std::int64_t height = bottom - top;
      const std::int64_t depth = y - top;
      return height == 0 ? x == 0 : std::abs(x) * height <= half_width * depth;
    }
  }
  return false;
}

namespace {

void fill_background(FrameRaster& f, BackgroundStyle style) {
  if (style != BackgroundStyle::Cluttered) {
    f = FrameRaster(background_color(style, 0, 0));
    return;
  }
  for (int row = 0; row < FrameRaster::kHeight; ++row) {
    for (int col = 0; col < FrameRaster::kWidth; ++col) {
      f.set(col, row, background_color(style, col, row));
    }
  }
}

void draw_object(FrameRaster& f, const VirtualObject& o, bool outline_only) {
  const PixelCoord c = world_to_pixel(o.position.x(), o.position.y());
  const int r = meters_to_pixels(o.size);
  const Rgb color = outline_only ? dim(texture_color(o.texture)) : texture_color(o.texture);
  for (int dr = -r; dr <= r; ++dr) {
    for (int dc = -r; dc <= r; ++dc) {
      if (!sprite_covers(o.shape, r, dc, dr)) continue;
      if (outline_only && sprite_covers(o.shape, r, dc - 1, dr) &&
          sprite_covers(o.shape, r, dc + 1, dr) && sprite_covers(o.shape, r, dc, dr - 1) &&
          sprite_covers(o.shape, r, dc, dr + 1)) {
        continue;
      }
      f.plot(c.col + dc, c.row + dr, color);
    }
  }
}

}  // namespace

FrameRaster render_topdown(const WorldState& w, FrameView view) {
  FrameRaster frame;
  fill_background(frame, w.background);
  const bool real = view == FrameView::Real;
  for (const auto& o : w.objects) draw_object(frame, o, real);
  if (real) {
    const PixelCoord c = world_to_pixel(w.drone.position.x(), w.drone.position.y());
    for (int dr = -kDroneRadiusPx; dr <= kDroneRadiusPx; ++dr) {
      for (int dc = -kDroneRadiusPx; dc <= kDroneRadiusPx; ++dc) {
        if (dc * dc + dr * dr <= kDroneRadiusPx * kDroneRadiusPx) {
          frame.plot(c.col + dc, c.row + dr, kDroneColor);
        }
      }
    }
  }
  return frame;
}

}  // namespace hapticdrone::sim
