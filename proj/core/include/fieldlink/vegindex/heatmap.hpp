#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fieldlink/vegindex/image.hpp"
#include "fieldlink/vegindex/index.hpp"

namespace fieldlink::vegindex {

inline constexpr std::array<std::uint8_t, 3> kMaskedColor{128, 128, 128};

/// Diverging red -> white -> blue ramp; t in [0, 1] with 0 -> red, 1 -> blue.
std::array<std::uint8_t, 3> diverging_color(double t);

/// Colours each valid pixel by its position within the map's own
/// [min, max]; masked pixels are mid-gray. Throws Error(empty_mask).
RgbImage render_heatmap_image(const IndexMap& map);

/// render_heatmap_image, PNG encoded.
std::vector<std::uint8_t> render_heatmap(const IndexMap& map);

}  // namespace fieldlink::vegindex
