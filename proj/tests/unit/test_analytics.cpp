#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fieldlink/analytics/loess.hpp"
#include "fieldlink/analytics/report.hpp"
#include "fieldlink/analytics/usage.hpp"
#include "fieldlink/seed/fixtures.hpp"
#include "fieldlink/testing/oracles.hpp"
#include "unit_support.hpp"

using namespace fieldlink;
using namespace fieldlink::analytics;
using testing::code_of;
using testing::World;

namespace {

std::vector<double> iota_x(std::size_t n) {
  std::vector<double> x(n);
  std::iota(x.begin(), x.end(), 0.0);
  return x;
}

std::vector<double> noisy_line(const std::vector<double>& x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 2.0);
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 - 0.4 * v + noise(rng));
  return y;
}

}  // namespace

TEST_SUITE("analytics") {
  TEST_CASE("loess reproduces polynomials of its degree") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
      // Irregular but increasing abscissae.
      std::vector<double> x;
      double cur = 0.0;
      for (int i = 0; i < 25; ++i) x.push_back(cur += 0.2 + coef(rng) * coef(rng) * 0.1 + 0.5);
      const double a = coef(rng), b = coef(rng), c = coef(rng);
      for (int degree : {1, 2}) {
        std::vector<double> y;
        for (double v : x) y.push_back(a + b * v + (degree == 2 ? c * v * v : 0.0));
        const auto fit = loess_fit(x, y, 0.5, degree);
        for (const auto& p : fit.points) CHECK(p.fitted == doctest::Approx(p.y).epsilon(1e-9).scale(1.0));
      }
    }
  }

  TEST_CASE("loess is equivariant under affine changes of y") {
    const auto x = iota_x(40);
    const auto y = noisy_line(x, 2);
    for (int degree : {1, 2}) {
      const auto base = loess_fit(x, y, 0.6, degree);
      std::vector<double> moved;
      for (double v : y) moved.push_back(2.5 * v - 7.0);
      const auto fit = loess_fit(x, moved, 0.6, degree);
      for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(fit.points[i].fitted == doctest::Approx(2.5 * base.points[i].fitted - 7.0));
        CHECK(fit.points[i].se == doctest::Approx(2.5 * base.points[i].se));
      }
      CHECK(fit.sigma == doctest::Approx(2.5 * base.sigma));
    }
  }

  TEST_CASE("loess agrees with the normal-equations oracle") {
    const auto x = iota_x(60);
    const auto y = noisy_line(x, 3);
    for (double span : {0.2, 0.5, 0.75, 1.0}) {
      for (int degree : {1, 2}) {
        const auto fit = loess_fit(x, y, span, degree);
        for (std::size_t i = 0; i < x.size(); i += 7) {
          CHECK(fit.points[i].fitted == doctest::Approx(testing::loess_oracle(x, y, i, span, degree)).epsilon(1e-7));
        }
      }
    }
  }

  TEST_CASE("confidence band brackets the fit") {
    const auto x = iota_x(30);
    const auto fit = loess_fit(x, noisy_line(x, 4));
    CHECK(fit.span == kDefaultSpan);
    CHECK(fit.degree == kDefaultDegree);
    CHECK(fit.sigma > 0.0);
    for (const auto& p : fit.points) {
      CHECK(p.se >= 0.0);
      CHECK(p.lower <= p.fitted);
      CHECK(p.upper >= p.fitted);
      CHECK(p.upper - p.fitted == doctest::Approx(kBandZ * p.se));
      CHECK(p.fitted - p.lower == doctest::Approx(kBandZ * p.se));
    }
    const auto j = to_json(fit);
    CHECK(j["points"].size() == 30);
  }

  TEST_CASE("loess argument validation") {
    const auto x = iota_x(10);
    const auto y = noisy_line(x, 5);
    CHECK(code_of([&] { loess_fit(x, y, 0.0, 2); }) == Errc::bad_span);
    CHECK(code_of([&] { loess_fit(x, y, 1.5, 2); }) == Errc::bad_span);
    CHECK(code_of([&] { loess_fit(x, y, 0.5, 3); }) == Errc::invalid_argument);
    const std::vector<double> three{0, 1, 2};
    CHECK(code_of([&] { loess_fit(three, three, 1.0, 2); }) == Errc::too_few_points);
    CHECK_NOTHROW(loess_fit(three, three, 1.0, 1));
    const std::vector<double> flat{0, 1, 1, 2};
    CHECK(code_of([&] { loess_fit(flat, flat, 1.0, 1); }) == Errc::invalid_argument);
  }

  TEST_CASE("days parse and format") {
    CHECK(format_day(parse_day("2020-02-29")) == "2020-02-29");
    CHECK(code_of([] { parse_day("2021-02-29"); }) == Errc::invalid_argument);
    CHECK(code_of([] { parse_day("2021-13-01"); }) == Errc::invalid_argument);
    CHECK(code_of([] { parse_day("yesterday"); }) == Errc::invalid_argument);
    CHECK(parse_day("2020-03-01") - parse_day("2020-02-28") == std::chrono::days(2));
  }

  TEST_CASE("download counters accumulate per day") {
    World w;
    const auto d1 = parse_day("2020-01-02");
    const auto d0 = parse_day("2020-01-01");
    record_download(w.docs, d1, 3);
    record_download(w.docs, d0);
    const auto series = record_download(w.docs, d1, 2);
    REQUIRE(series.size() == 2);
    CHECK(series[0] == DayCount{d0, 1});
    CHECK(series[1] == DayCount{d1, 5});
    CHECK(download_series(w.docs) == series);
    CHECK(to_json(series).size() == 2);
    // Day numbers are offsets from the first day.
    record_download(w.docs, parse_day("2020-01-05"), 9);
    const auto fit = loess_fit(download_series(w.docs), 1.0, 1);
    CHECK(fit.points.back().x == 4.0);
  }

  TEST_CASE("seeded download series is reproducible") {
    World a, b, c;
    const auto first = parse_day("2020-01-01");
    const auto sa = seed::seed_downloads(a.docs, first, 30, 7);
    CHECK(sa.size() == 30);
    CHECK(sa == seed::seed_downloads(b.docs, first, 30, 7));
    CHECK(sa != seed::seed_downloads(c.docs, first, 30, 8));
    for (std::size_t i = 1; i < sa.size(); ++i) CHECK(sa[i].day - sa[i - 1].day == std::chrono::days(1));
  }

  TEST_CASE("usage stats count what the services created") {
    World w;
    seed::UsagePlan plan;
    plan.farmers = 4;
    plan.agronomists = 2;
    plan.merchants = 1;
    plan.chats = 7;
    plan.samples = 3;
    plan.products = 5;
    plan.messages = 20;
    plan.farms = 3;
    plan.crops = 6;
    seed::seed_usage({w.registry, w.chat, w.market, w.diagnosis, w.clock}, plan);
    const auto s = compute_usage_stats(w.docs);
    CHECK(s.farmers == 4);
    CHECK(s.agronomists == 2);
    CHECK(s.merchants == 1);
    CHECK(s.total_users == 7);
    CHECK(s.chats == 7);
    CHECK(s.samples == 3);
    CHECK(s.products == 5);
    CHECK(s.messages == 20);
    CHECK(s.farms == 3);
    CHECK(s.crops == 6);
    CHECK(registry::check_integrity(w.docs, w.blobs).empty());
    CHECK(w.registry.authenticate("farmer-001", seed::kFixtureSecret).role == Role::farmer);
  }

  TEST_CASE("impossible usage plans are rejected") {
    World w;
    const seed::Services services{w.registry, w.chat, w.market, w.diagnosis, w.clock};
    seed::UsagePlan too_many_chats{2, 1, 0, 3, 0, 0, 0, 0, 0};
    CHECK(code_of([&] { seed::seed_usage(services, too_many_chats); }) == Errc::invalid_argument);
    seed::UsagePlan orphan_crops{1, 0, 0, 0, 0, 0, 0, 0, 2};
    CHECK(code_of([&] { seed::seed_usage(services, orphan_crops); }) == Errc::invalid_argument);
    CHECK(compute_usage_stats(w.docs) == UsageStats{});
  }

  TEST_CASE("usage csv round trip and validation") {
    UsageStats s{171, 146, 9, 12, 171, 38, 65, 1350, 80, 275};
    const auto csv = usage_csv(s);
    CHECK(csv.rfind("metric,value\n", 0) == 0);
    CHECK(parse_usage_csv(csv) == s);
    CHECK(code_of([] { parse_usage_csv("farmers,1\n"); }) == Errc::format_error);
    CHECK(code_of([] { parse_usage_csv("metric,value\nfarmers,one\n"); }) == Errc::format_error);
    CHECK(code_of([] { parse_usage_csv("metric,value\nfarmers,1\n"); }) == Errc::format_error);
    CHECK(code_of([&] { parse_usage_csv(csv + "goats,4\n"); }) == Errc::format_error);
  }

  TEST_CASE("trend plot has fixed dimensions") {
    World w;
    CHECK(vegindex::decode_rgb(render_trend_png({}, std::nullopt)).width() == kPlotWidth);
    const auto series = seed::seed_downloads(w.docs, parse_day("2021-06-01"), 20);
    const auto png = render_trend_png(series, loess_fit(series));
    const auto img = vegindex::decode_rgb(png);
    CHECK(img.width() == kPlotWidth);
    CHECK(img.height() == kPlotHeight);
    CHECK(export_report(w.docs, ReportFormat::png).size() > 0);
    const auto csv = export_report(w.docs, ReportFormat::csv);
    CHECK(parse_usage_csv(std::string(csv.begin(), csv.end())) == compute_usage_stats(w.docs));
  }
}
