#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pathgls {

// Interleaved 8-bit RGB raster, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height bytes, RGB order

  bool empty() const { return width <= 0 || height <= 0; }

  const std::uint8_t* px(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  std::uint8_t* px(int x, int y) {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }

  static Image blank(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

Image load_image(const std::string& path);
void save_png(const Image& image, const std::string& path);

std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(const std::vector<std::uint8_t>& bytes);

// Content hash over (width, height, raw pixels), independent of the
// container format the image travelled in.
std::string image_content_hash(const Image& image);

}  // namespace pathgls
