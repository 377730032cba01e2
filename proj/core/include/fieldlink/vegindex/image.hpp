#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fieldlink::vegindex {

// Row-major interleaved 8-bit RGB.
class RgbImage {
 public:
  RgbImage() = default;
  /// Black image. Throws Error(invalid_argument) for a zero dimension.
  RgbImage(int width, int height);
  /// Adopts `pixels`; its length must be width * height * 3.
  RgbImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  const std::uint8_t* at(int x, int y) const { return &pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3]; }
  std::uint8_t* at(int x, int y) { return &pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3]; }

  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto* p = at(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Decodes a PNG or JPEG stream (sniffed by signature). Alpha is dropped,
/// grayscale expanded to three channels, 16-bit samples keep their high byte.
/// Throws Error(decode_error) on anything else.
RgbImage decode_rgb(std::span<const std::uint8_t> bytes);

/// Lossless 8-bit RGB PNG encoding.
std::vector<std::uint8_t> encode_png(const RgbImage& image);

/// Bilinear resize (pixel-centre aligned, edge replicated).
RgbImage resize_bilinear(const RgbImage& image, int width, int height);

}  // namespace fieldlink::vegindex
