#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hapticdrone/core_model.hpp"

namespace hapticdrone::png {

/// 8-bit truecolor, non-interlaced PNG. Output bytes are a pure function of
/// the raster.
std::vector<std::uint8_t> encode(const FrameRaster& frame);

/// Throws FormatError unless the stream is a 640x320 8-bit RGB PNG.
FrameRaster decode(std::span<const std::uint8_t> bytes);

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Reads and decodes; FormatError messages carry the file path.
FrameRaster load(const std::filesystem::path& path);

}  // namespace hapticdrone::png
