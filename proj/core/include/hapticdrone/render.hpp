#pragma once

#include "hapticdrone/core_model.hpp"
#include "hapticdrone/world.hpp"

namespace hapticdrone::sim {

enum class FrameView : std::uint8_t { Real = 0, VR = 1 };

inline constexpr double kPixelsPerMeter = 100.0;
inline constexpr int kCenterCol = 320;
inline constexpr int kCenterRow = 160;
inline constexpr int kDroneRadiusPx = 12;

struct PixelCoord {
  int col = 0;
  int row = 0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Orthographic top-down map: col = 320 + round(100 x), row = 160 - round(100 y).
PixelCoord world_to_pixel(double x, double y) noexcept;
/// World (x, y) of a pixel center.
Vec2 pixel_to_world(const PixelCoord& px) noexcept;
/// Pixel length of a world distance, rounded to the nearest pixel.
int meters_to_pixels(double meters) noexcept;

Rgb texture_color(Texture t) noexcept;
/// 50% dimmed texture color used for outlines in the real view.
Rgb dim(Rgb c) noexcept;
/// Background color at a pixel for the given style.
Rgb background_color(BackgroundStyle style, int col, int row) noexcept;

inline constexpr Rgb kDroneColor{255, 255, 255};

/// True when the pixel lies inside the sprite of a shape centered at the
/// origin with radius/half-extent r pixels. Integer arithmetic only.
bool sprite_covers(Shape shape, int radius_px, int dcol, int drow) noexcept;

/// Deterministic integer-pixel rasterizer. The VR view shows filled object
/// sprites; the real view shows the drone plus dimmed object outlines.
FrameRaster render_topdown(const WorldState& w, FrameView view);

}  // namespace hapticdrone::sim
