#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "textcue/geometry.hpp"

namespace textcue {

/// 8-bit interleaved raster, 1 (gray), 2 (gray+alpha), 3 (RGB) or 4 (RGBA)
/// channels, rows top to bottom.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t* at(std::size_t x, std::size_t y) {
    return pixels.data() + (y * width + x) * channels;
  }
  const std::uint8_t* at(std::size_t x, std::size_t y) const {
    return pixels.data() + (y * width + x) * channels;
  }

  bool operator==(const Image&) const = default;
};

/// Clockwise rotation by 90, 180 or 270 degrees; a pure pixel permutation.
/// Other angles throw Error{kUnsupportedAngle}.
Image rotate_clockwise(const Image& image, int degrees);

/// PNG, JPEG and binary PNM (P5/P6), detected from the file signature.
Image load_image(const std::filesystem::path& path);

/// Format follows the extension: .png, .jpg/.jpeg, .pgm/.ppm/.pnm.
void save_image(const Image& image, const std::filesystem::path& path);

/// Draws a rectangle outline, clipped to the image.
void draw_box(Image& image, const BoxPx& box, std::array<std::uint8_t, 3> rgb,
              int thickness = 3);

}  // namespace textcue
