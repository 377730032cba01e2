#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fieldlink/analytics/loess.hpp"
#include "fieldlink/analytics/usage.hpp"

namespace fieldlink::analytics {

inline constexpr int kPlotWidth = 800;
inline constexpr int kPlotHeight = 500;

enum class ReportFormat { csv, png };

/// `metric,value` header followed by one row per count.
std::string usage_csv(const UsageStats& stats);
/// Throws FormatError on a malformed document.
UsageStats parse_usage_csv(std::string_view csv);

/// Scatter of daily counts, with the trend line and shaded band when a fit
/// is given. An empty series yields the axes alone.
std::vector<std::uint8_t> render_trend_png(const TimeSeries& series, const std::optional<LoessFit>& fit);

/// CSV: usage stats. PNG: download trend, fitted when the series is long
/// enough for `degree`.
std::vector<std::uint8_t> export_report(const store::DocumentStore& docs, ReportFormat format,
                                        double span = kDefaultSpan, int degree = kDefaultDegree);

}  // namespace fieldlink::analytics
