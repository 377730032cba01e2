#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldlink/analytics/usage.hpp"

namespace fieldlink::analytics {

inline constexpr double kDefaultSpan = 0.75;
inline constexpr int kDefaultDegree = 2;
inline constexpr double kBandZ = 1.96;

struct LoessPoint {
  double x;
  double y;
  double fitted;
  double lower;
  double upper;
  double se;
};

struct LoessFit {
  double span;
  int degree;
  double sigma;  // residual noise estimate
  std::vector<LoessPoint> points;
};

/// Local polynomial regression with tricube weights over the ceil(span*n)
/// nearest neighbours of each point, and a pointwise 95% band.
///
/// `x` must be strictly increasing. Throws TooFewPoints (n < degree + 2),
/// BadSpan (span outside (0, 1]), InvalidArgument (degree not 1 or 2).
LoessFit loess_fit(std::span<const double> x, std::span<const double> y, double span = kDefaultSpan,
                   int degree = kDefaultDegree);

/// Fit over a download series; x is the day number relative to the first day.
LoessFit loess_fit(const TimeSeries& series, double span = kDefaultSpan, int degree = kDefaultDegree);

nlohmann::json to_json(const LoessFit& fit);

}  // namespace fieldlink::analytics
