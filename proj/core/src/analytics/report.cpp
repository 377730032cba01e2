#include "fieldlink/analytics/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fieldlink/common/error.hpp"
#include "fieldlink/vegindex/image.hpp"
#include "raster.hpp"

namespace fieldlink::analytics {

namespace {

struct Row {
  std::string_view name;
  std::uint64_t UsageStats::*field;
};

constexpr Row kRows[] = {
    {"total_users", &UsageStats::total_users}, {"farmers", &UsageStats::farmers},
    {"agronomists", &UsageStats::agronomists}, {"merchants", &UsageStats::merchants},
    {"chats", &UsageStats::chats},             {"samples", &UsageStats::samples},
    {"products", &UsageStats::products},       {"messages", &UsageStats::messages},
    {"farms", &UsageStats::farms},             {"crops", &UsageStats::crops},
};

constexpr int kLeft = 60;
constexpr int kRight = 20;
constexpr int kTop = 20;
constexpr int kBottom = 40;

constexpr Color kWhite{255, 255, 255};
constexpr Color kAxis{0, 0, 0};
constexpr Color kGrid{225, 225, 225};
constexpr Color kPoint{90, 90, 90};
constexpr Color kTrend{20, 60, 160};
constexpr Color kBand{70, 120, 220};

// Maps data coordinates into the plot area.
struct Frame {
  double x_min, x_max, y_min, y_max;

  int px(double x) const {
    const double t = (x - x_min) / (x_max - x_min);
    return kLeft + static_cast<int>(std::lround(t * (kPlotWidth - kLeft - kRight - 1)));
  }
  int py(double y) const {
    const double t = (y - y_min) / (y_max - y_min);
    return kPlotHeight - kBottom - static_cast<int>(std::lround(t * (kPlotHeight - kTop - kBottom - 1)));
  }
};

void draw_axes(Canvas& c) {
  const int x_axis = kPlotHeight - kBottom;
  for (int i = 1; i <= 4; ++i) {
    const int y = x_axis - i * (kPlotHeight - kTop - kBottom) / 4;
    c.line(kLeft + 1, y, kPlotWidth - kRight, y, kGrid);
    c.line(kLeft - 5, y, kLeft, y, kAxis);
  }
  for (int i = 1; i <= 6; ++i) {
    const int x = kLeft + i * (kPlotWidth - kLeft - kRight) / 6;
    c.line(x, x_axis, x, x_axis + 5, kAxis);
  }
  c.line(kLeft, kTop, kLeft, x_axis, kAxis);
  c.line(kLeft, x_axis, kPlotWidth - kRight, x_axis, kAxis);
}

}  // namespace

std::string usage_csv(const UsageStats& stats) {
  std::string out = "metric,value\n";
  for (const auto& row : kRows) out += std::string(row.name) + "," + std::to_string(stats.*row.field) + "\n";
  return out;
}

UsageStats parse_usage_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != "metric,value") throw Error(Errc::format_error, "missing metric,value header");
  UsageStats stats;
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(Errc::format_error, "malformed row '" + line + "'");
    const auto name = line.substr(0, comma);
    const auto it = std::find_if(std::begin(kRows), std::end(kRows), [&](const Row& r) { return r.name == name; });
    if (it == std::end(kRows)) throw Error(Errc::format_error, "unknown metric '" + name + "'");
    try {
      std::size_t used = 0;
      const auto value = line.substr(comma + 1);
      stats.*(it->field) = std::stoull(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(Errc::format_error, "bad value in row '" + line + "'");
    }
    ++seen;
  }
  if (seen != std::size(kRows)) throw Error(Errc::format_error, "expected " + std::to_string(std::size(kRows)) + " metrics");
  return stats;
}

std::vector<std::uint8_t> render_trend_png(const TimeSeries& series, const std::optional<LoessFit>& fit) {
  Canvas canvas(kPlotWidth, kPlotHeight, kWhite);
  draw_axes(canvas);
  if (series.empty()) return vegindex::encode_png(canvas.image());

  std::vector<double> xs;
  double y_max = 1.0;
  for (const auto& p : series) {
    xs.push_back(static_cast<double>((p.day - series.front().day).count()));
    y_max = std::max(y_max, static_cast<double>(p.count));
  }
  if (fit) {
    for (const auto& p : fit->points) y_max = std::max(y_max, p.upper);
  }
  double y_min = 0.0;
  if (fit) {
    for (const auto& p : fit->points) y_min = std::min(y_min, p.lower);
  }
  const double x_max = xs.size() > 1 ? xs.back() : 1.0;
  const Frame frame{0.0, x_max, y_min, y_max * 1.05};

  if (fit && fit->points.size() > 1) {
    const auto& pts = fit->points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const int xa = frame.px(pts[i].x);
      const int xb = frame.px(pts[i + 1].x);
      for (int x = xa; x <= xb; ++x) {
        const double t = xb == xa ? 0.0 : static_cast<double>(x - xa) / (xb - xa);
        const double lo = pts[i].lower + t * (pts[i + 1].lower - pts[i].lower);
        const double hi = pts[i].upper + t * (pts[i + 1].upper - pts[i].upper);
        // Shared endpoints are shaded once.
        if (x == xb && i + 2 < pts.size()) continue;
        canvas.shade_column(x, frame.py(lo), frame.py(hi), kBand, 0.25);
      }
    }
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    canvas.disc(frame.px(xs[i]), frame.py(static_cast<double>(series[i].count)), 2, kPoint);
  }
  if (fit && fit->points.size() > 1) {
    const auto& pts = fit->points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const int xa = frame.px(pts[i].x);
      const int xb = frame.px(pts[i + 1].x);
      const int ya = frame.py(pts[i].fitted);
      const int yb = frame.py(pts[i + 1].fitted);
      canvas.line(xa, ya, xb, yb, kTrend);
      canvas.line(xa, ya + 1, xb, yb + 1, kTrend);
    }
  }
  return vegindex::encode_png(canvas.image());
}

std::vector<std::uint8_t> export_report(const store::DocumentStore& docs, ReportFormat format, double span,
                                        int degree) {
  if (format == ReportFormat::csv) {
    const auto csv = usage_csv(compute_usage_stats(docs));
    return {csv.begin(), csv.end()};
  }
  const auto series = download_series(docs);
  std::optional<LoessFit> fit;
  if (series.size() >= static_cast<std::size_t>(degree) + 2) fit = loess_fit(series, span, degree);
  return render_trend_png(series, fit);
}

}  // namespace fieldlink::analytics
