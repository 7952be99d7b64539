#include "hapticdrone/png_codec.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "hapticdrone/errors.hpp"

namespace hapticdrone::png {

std::vector<std::uint8_t> encode(const FrameRaster& frame) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = FrameRaster::kWidth;
  image.height = FrameRaster::kHeight;
  image.format = PNG_FORMAT_RGB;
  image.flags = PNG_IMAGE_FLAG_FAST;

  png_alloc_size_t size = 0;
  const void* pixels = frame.data().data();
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0, nullptr)) {
    throw FormatError(std::string("png sizing failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0, nullptr)) {
    throw FormatError(std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  png_image_free(&image);
  return out;
}

FrameRaster decode(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw FormatError(std::string("not a readable PNG: ") + image.message);
  }
  if (image.width != FrameRaster::kWidth || image.height != FrameRaster::kHeight) {
    const std::string dims = std::to_string(image.width) + "x" + std::to_string(image.height);
    png_image_free(&image);
    throw FormatError("PNG is " + dims + ", expected 640x320");
  }
  if (image.format != PNG_FORMAT_RGB) {
    png_image_free(&image);
    throw FormatError("PNG is not 8-bit RGB truecolor");
  }
  std::vector<std::uint8_t> pixels(FrameRaster::kByteSize);
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("PNG decode failed: " + msg);
  }
  return FrameRaster(std::move(pixels));
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

FrameRaster load(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file(path);
  } catch (const IoError& e) {
    throw FormatError(e.what());
  }
  try {
    return decode(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace hapticdrone::png
