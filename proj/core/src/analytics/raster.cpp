#include "raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace fieldlink::analytics {

Canvas::Canvas(int width, int height, Color background) : image_(width, height) {
  fill_rect(0, 0, width - 1, height - 1, background);
}

void Canvas::pixel(int x, int y, Color c) {
  if (x < 0 || y < 0 || x >= image_.width() || y >= image_.height()) return;
  image_.set(x, y, c[0], c[1], c[2]);
}

void Canvas::blend(int x, int y, Color c, double alpha) {
  if (x < 0 || y < 0 || x >= image_.width() || y >= image_.height()) return;
  const auto* old = image_.at(x, y);
  Color mixed;
  for (int i = 0; i < 3; ++i) mixed[i] = static_cast<std::uint8_t>(std::lround(old[i] * (1 - alpha) + c[i] * alpha));
  pixel(x, y, mixed);
}

void Canvas::fill_rect(int x0, int y0, int x1, int y1, Color c) {
  for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) {
    for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) pixel(x, y, c);
  }
}

void Canvas::line(int x0, int y0, int x1, int y1, Color c) {
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    pixel(x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void Canvas::disc(int cx, int cy, int radius, Color c) {
  for (int y = -radius; y <= radius; ++y) {
    for (int x = -radius; x <= radius; ++x) {
      if (x * x + y * y <= radius * radius) pixel(cx + x, cy + y, c);
    }
  }
}

void Canvas::shade_column(int x, int y0, int y1, Color c, double alpha) {
  for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) blend(x, y, c, alpha);
}

}  // namespace fieldlink::analytics
