#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "simota/geometry.hpp"

namespace simota {

/// Interleaved 8-bit RGB image.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::uint8_t& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Binary PPM (P6, maxval 255). Comments in the header are skipped.
Image read_ppm(const std::filesystem::path& path);
Image decode_ppm(const std::string& bytes);
void write_ppm(const std::filesystem::path& path, const Image& img);
std::string encode_ppm(const Image& img);

struct Scene {
  Image image;
  std::vector<LabeledBox> gts;
  std::string id;

  int width() const noexcept { return image.width; }
  int height() const noexcept { return image.height; }

  /// H, W >= 32 and every gt box valid and intersecting the canvas.
  void validate() const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

}  // namespace simota
