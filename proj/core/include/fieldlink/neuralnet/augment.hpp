#pragma once

#include "fieldlink/neuralnet/rng.hpp"
#include "fieldlink/vegindex/image.hpp"

namespace fieldlink::neuralnet {

struct AugmentConfig {
  bool enabled = true;
  double flip_probability = 0.5;
  double max_rotation_deg = 15.0;
  double min_zoom = 0.9;
  double max_zoom = 1.1;
};

// One concrete draw of the random transforms.
struct AugmentParams {
  bool flip = false;
  double rotation_deg = 0.0;
  double zoom = 1.0;
};

AugmentParams draw_augmentation(Rng& rng, const AugmentConfig& cfg = {});

/// Horizontal flip, then rotation about the image centre and zoom (>1 zooms
/// in), bilinear resampling with edge replication. Dimensions are preserved.
vegindex::RgbImage apply_augmentation(const vegindex::RgbImage& image, const AugmentParams& params);

vegindex::RgbImage augment(const vegindex::RgbImage& image, Rng& rng, const AugmentConfig& cfg = {});

}  // namespace fieldlink::neuralnet
