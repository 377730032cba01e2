#include "fieldlink/vegindex/index.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "fieldlink/common/error.hpp"

namespace fieldlink::vegindex {

ReflectanceImage::ReflectanceImage(int width, int height, std::vector<Reflectance> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 1 || height < 1 || values_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(Errc::invalid_argument, "reflectance buffer does not match its dimensions");
  }
}

std::string_view to_string(IndexKind kind) noexcept { return kind == IndexKind::tgi ? "tgi" : "grvi"; }

IndexKind parse_index_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "tgi") return IndexKind::tgi;
  if (lower == "grvi") return IndexKind::grvi;
  throw Error(Errc::invalid_argument, "unknown index kind '" + std::string(text) + "' (expected tgi or grvi)");
}

std::size_t IndexMap::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

ReflectanceImage to_reflectance(const RgbImage& image) {
  std::vector<Reflectance> values;
  values.reserve(static_cast<std::size_t>(image.width()) * image.height());
  const auto px = image.pixels();
  for (std::size_t i = 0; i < px.size(); i += 3) {
    values.push_back({px[i] / kReflectanceDivisor, px[i + 1] / kReflectanceDivisor, px[i + 2] / kReflectanceDivisor});
  }
  return ReflectanceImage(image.width(), image.height(), std::move(values));
}

IndexMap compute_index(const ReflectanceImage& refl, IndexKind kind) {
  IndexMap map{kind, refl.width(), refl.height(), {}, {}};
  const auto n = refl.values().size();
  map.values.resize(n);
  map.valid.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = refl.values()[i];
    if (kind == IndexKind::tgi) {
      map.values[i] = tgi(p);
      continue;
    }
    const double denom = p.g550 + p.r670;
    if (denom == 0.0) {
      // Black pixels carry no colour ratio.
      map.values[i] = 0.0;
      map.valid[i] = 0;
    } else {
      map.values[i] = (p.g550 - p.r670) / denom;
    }
  }
  return map;
}

double nearest_rank(const std::vector<double>& sorted, double percent) {
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(percent / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

IndexSummary summarize_index(const IndexMap& map) {
  std::vector<double> v;
  v.reserve(map.values.size());
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    if (map.valid[i]) v.push_back(map.values[i]);
  }
  if (v.empty()) throw Error(Errc::empty_mask, "index map has no valid pixels");
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  IndexSummary s{};
  s.kind = map.kind;
  s.mean = sum / static_cast<double>(v.size());
  s.min = v.front();
  s.max = v.back();
  s.p5 = nearest_rank(v, 5);
  s.p25 = nearest_rank(v, 25);
  s.p50 = nearest_rank(v, 50);
  s.p75 = nearest_rank(v, 75);
  s.p95 = nearest_rank(v, 95);
  s.valid_fraction = static_cast<double>(v.size()) / static_cast<double>(map.values.size());
  return s;
}

nlohmann::json to_json(const IndexSummary& s) {
  return {
      {"kind", to_string(s.kind)},
      {"mean", s.mean},
      {"min", s.min},
      {"max", s.max},
      {"p5", s.p5},
      {"p25", s.p25},
      {"p50", s.p50},
      {"p75", s.p75},
      {"p95", s.p95},
      {"valid_fraction", s.valid_fraction},
      {"reflectance_divisor", kReflectanceDivisor},
  };
}

IndexSummary summary_from_json(const nlohmann::json& doc) {
  IndexSummary s{};
  s.kind = parse_index_kind(doc.at("kind").get<std::string>());
  s.mean = doc.at("mean").get<double>();
  s.min = doc.at("min").get<double>();
  s.max = doc.at("max").get<double>();
  s.p5 = doc.at("p5").get<double>();
  s.p25 = doc.at("p25").get<double>();
  s.p50 = doc.at("p50").get<double>();
  s.p75 = doc.at("p75").get<double>();
  s.p95 = doc.at("p95").get<double>();
  s.valid_fraction = doc.at("valid_fraction").get<double>();
  return s;
}

}  // namespace fieldlink::vegindex
