#pragma once

#include <array>
#include <cstdint>

#include "fieldlink/vegindex/image.hpp"

namespace fieldlink::analytics {

using Color = std::array<std::uint8_t, 3>;

// Minimal RGB drawing surface for report charts.
class Canvas {
 public:
  Canvas(int width, int height, Color background);

  void pixel(int x, int y, Color c);
  void blend(int x, int y, Color c, double alpha);
  void fill_rect(int x0, int y0, int x1, int y1, Color c);
  void line(int x0, int y0, int x1, int y1, Color c);
  void disc(int cx, int cy, int radius, Color c);
  /// Fills column x between rows y0 and y1 (either order) with `alpha` coverage.
  void shade_column(int x, int y0, int y1, Color c, double alpha);

  const vegindex::RgbImage& image() const noexcept { return image_; }

 private:
  vegindex::RgbImage image_;
};

}  // namespace fieldlink::analytics
