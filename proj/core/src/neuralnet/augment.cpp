#include "fieldlink/neuralnet/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fieldlink::neuralnet {

using vegindex::RgbImage;

AugmentParams draw_augmentation(Rng& rng, const AugmentConfig& cfg) {
  AugmentParams p;
  p.flip = uniform01(rng) < cfg.flip_probability;
  p.rotation_deg = uniform(rng, -cfg.max_rotation_deg, cfg.max_rotation_deg);
  p.zoom = uniform(rng, cfg.min_zoom, cfg.max_zoom);
  return p;
}

RgbImage apply_augmentation(const RgbImage& image, const AugmentParams& params) {
  RgbImage src = image;
  if (params.flip) {
    for (int y = 0; y < src.height(); ++y) {
      for (int x = 0; x < src.width() / 2; ++x) {
        std::swap_ranges(src.at(x, y), src.at(x, y) + 3, src.at(src.width() - 1 - x, y));
      }
    }
  }
  if (params.rotation_deg == 0.0 && params.zoom == 1.0) return src;

  const int w = src.width();
  const int h = src.height();
  RgbImage out(w, h);
  const double theta = params.rotation_deg * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Inverse map: undo the zoom, then rotate back by -theta.
      const double dx = (x - cx) / params.zoom;
      const double dy = (y - cy) / params.zoom;
      const double sx = std::clamp(cos_t * dx + sin_t * dy + cx, 0.0, static_cast<double>(w - 1));
      const double sy = std::clamp(-sin_t * dx + cos_t * dy + cy, 0.0, static_cast<double>(h - 1));
      const int x0 = static_cast<int>(sx);
      const int y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const double fx = sx - x0;
      const double fy = sy - y0;
      auto* dst = out.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = src.at(x0, y0)[c] * (1 - fx) + src.at(x1, y0)[c] * fx;
        const double bottom = src.at(x0, y1)[c] * (1 - fx) + src.at(x1, y1)[c] * fx;
        dst[c] = static_cast<std::uint8_t>(std::lround(top * (1 - fy) + bottom * fy));
      }
    }
  }
  return out;
}

RgbImage augment(const RgbImage& image, Rng& rng, const AugmentConfig& cfg) {
  return apply_augmentation(image, draw_augmentation(rng, cfg));
}

}  // namespace fieldlink::neuralnet
