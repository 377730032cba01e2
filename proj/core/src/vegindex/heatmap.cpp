#include "fieldlink/vegindex/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fieldlink/common/error.hpp"

namespace fieldlink::vegindex {

std::array<std::uint8_t, 3> diverging_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  if (t <= 0.5) {
    const auto c = static_cast<std::uint8_t>(std::lround(510.0 * t));
    return {255, c, c};
  }
  const auto c = static_cast<std::uint8_t>(std::lround(510.0 * (1.0 - t)));
  return {c, c, 255};
}

RgbImage render_heatmap_image(const IndexMap& map) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    if (!map.valid[i]) continue;
    lo = std::min(lo, map.values[i]);
    hi = std::max(hi, map.values[i]);
  }
  if (lo > hi) throw Error(Errc::empty_mask, "index map has no valid pixels");

  RgbImage out(map.width, map.height);
  const double range = hi - lo;
  auto px = out.pixels();
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    std::array<std::uint8_t, 3> c = kMaskedColor;
    if (map.valid[i]) {
      // A flat map sits at the neutral centre of the ramp.
      c = diverging_color(range > 0.0 ? (map.values[i] - lo) / range : 0.5);
    }
    std::copy(c.begin(), c.end(), px.begin() + static_cast<std::ptrdiff_t>(i * 3));
  }
  return out;
}

std::vector<std::uint8_t> render_heatmap(const IndexMap& map) { return encode_png(render_heatmap_image(map)); }

}  // namespace fieldlink::vegindex
