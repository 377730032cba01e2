#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldlink/vegindex/image.hpp"

namespace fieldlink::vegindex {

// Camera channels are read as broadband reflectance: R -> 670 nm,
// G -> 550 nm, B -> 480 nm, each scaled by 1/255 onto [0, 1].
inline constexpr double kReflectanceDivisor = 255.0;

struct Reflectance {
  double r670;
  double g550;
  double b480;
};

class ReflectanceImage {
 public:
  ReflectanceImage(int width, int height, std::vector<Reflectance> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::vector<Reflectance>& values() const noexcept { return values_; }
  const Reflectance& at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }

 private:
  int width_;
  int height_;
  std::vector<Reflectance> values_;
};

enum class IndexKind { tgi, grvi };

std::string_view to_string(IndexKind kind) noexcept;
/// Accepts "tgi" / "grvi" (case-insensitive); throws Error(invalid_argument).
IndexKind parse_index_kind(std::string_view text);

struct IndexMap {
  IndexKind kind;
  int width;
  int height;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;  // 1 where the value participates in statistics

  std::size_t valid_count() const noexcept;
};

struct IndexSummary {
  IndexKind kind;
  double mean;
  double min;
  double max;
  double p5;
  double p25;
  double p50;
  double p75;
  double p95;
  double valid_fraction;
};

ReflectanceImage to_reflectance(const RgbImage& image);

/// Triangular greenness index of a single pixel.
inline double tgi(const Reflectance& p) {
  // -0.5 * (190 (R - G) - 120 (R - B)), arranged so a flat pixel yields +0.
  return 0.5 * (120.0 * (p.r670 - p.b480) - 190.0 * (p.r670 - p.g550));
}

IndexMap compute_index(const ReflectanceImage& refl, IndexKind kind);

/// Nearest-rank percentile of an ascending-sorted, non-empty range.
double nearest_rank(const std::vector<double>& sorted, double percent);

/// Statistics over valid pixels; throws Error(empty_mask) if none are valid.
IndexSummary summarize_index(const IndexMap& map);

/// Flat key-value document; records the reflectance scale used.
nlohmann::json to_json(const IndexSummary& summary);
IndexSummary summary_from_json(const nlohmann::json& doc);

}  // namespace fieldlink::vegindex
