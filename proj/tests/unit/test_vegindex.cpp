#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "fieldlink/common/error.hpp"
#include "fieldlink/testing/support.hpp"
#include "fieldlink/vegindex/heatmap.hpp"
#include "fieldlink/vegindex/image.hpp"
#include "fieldlink/vegindex/index.hpp"

using namespace fieldlink;
using namespace fieldlink::vegindex;

namespace {

double index_of(double r, double g, double b, IndexKind kind) {
  return compute_index(ReflectanceImage(1, 1, {{r, g, b}}), kind).values[0];
}

RgbImage random_image(std::mt19937_64& rng, int w, int h) {
  RgbImage img(w, h);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(rng() % 256);
  return img;
}

}  // namespace

TEST_SUITE("vegindex") {
  TEST_CASE("flat pixels have zero index at every gray level") {
    for (int level = 0; level < 256; ++level) {
      const auto refl = to_reflectance(testing::solid_image(1, 1, level, level, level));
      CHECK(compute_index(refl, IndexKind::tgi).values[0] == 0.0);
      CHECK_FALSE(std::signbit(compute_index(refl, IndexKind::tgi).values[0]));
      const auto grvi = compute_index(refl, IndexKind::grvi);
      if (level == 0) {
        CHECK(grvi.valid[0] == 0);
      } else {
        CHECK(grvi.values[0] == 0.0);
      }
    }
  }

  TEST_CASE("reference pixels") {
    CHECK(index_of(0, 1, 0, IndexKind::tgi) == doctest::Approx(95.0).epsilon(1e-12));
    CHECK(index_of(0, 1, 0, IndexKind::grvi) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(index_of(1, 0, 0, IndexKind::grvi) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(index_of(1, 0, 0, IndexKind::tgi) == doctest::Approx(-35.0).epsilon(1e-12));
    CHECK(index_of(0, 0, 1, IndexKind::tgi) == doctest::Approx(-60.0).epsilon(1e-12));
    CHECK(index_of(0.4, 0.5, 0.2, IndexKind::tgi) == doctest::Approx(21.5).epsilon(1e-12));
    CHECK(index_of(0.2, 0.6, 0.0, IndexKind::grvi) == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("tgi is linear and grvi is scale invariant and antisymmetric") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int i = 0; i < 500; ++i) {
      const double r = u(rng), g = u(rng), b = u(rng), k = u(rng);
      CHECK(index_of(k * r, k * g, k * b, IndexKind::tgi) == doctest::Approx(k * index_of(r, g, b, IndexKind::tgi)));
      CHECK(index_of(k * r, k * g, k * b, IndexKind::grvi) == doctest::Approx(index_of(r, g, b, IndexKind::grvi)));
      CHECK(index_of(g, r, b, IndexKind::grvi) == doctest::Approx(-index_of(r, g, b, IndexKind::grvi)));
      const double grvi = index_of(r, g, b, IndexKind::grvi);
      CHECK(grvi >= -1.0);
      CHECK(grvi <= 1.0);
      // Adding the same amount to every band leaves TGI unchanged.
      CHECK(index_of(r + 0.3, g + 0.3, b + 0.3, IndexKind::tgi) == doctest::Approx(index_of(r, g, b, IndexKind::tgi)));
    }
  }

  TEST_CASE("reflectance scales channels by 1/255") {
    const auto refl = to_reflectance(testing::solid_image(2, 1, 255, 51, 0));
    REQUIRE(refl.values().size() == 2);
    CHECK(refl.at(1, 0).r670 == 1.0);
    CHECK(refl.at(1, 0).g550 == doctest::Approx(0.2));
    CHECK(refl.at(1, 0).b480 == 0.0);
  }

  TEST_CASE("summary statistics follow nearest rank over valid pixels") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
      const auto img = random_image(rng, 1 + static_cast<int>(rng() % 9), 1 + static_cast<int>(rng() % 9));
      const auto map = compute_index(to_reflectance(img), IndexKind::tgi);
      const auto s = summarize_index(map);
      auto sorted = map.values;
      std::sort(sorted.begin(), sorted.end());
      const auto n = sorted.size();
      auto pct = [&](double p) { return sorted[std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(p / 100 * n))) - 1]; };
      CHECK(s.min == sorted.front());
      CHECK(s.max == sorted.back());
      CHECK(s.p5 == pct(5));
      CHECK(s.p50 == pct(50));
      CHECK(s.p95 == pct(95));
      CHECK(s.min <= s.p5);
      CHECK(s.p5 <= s.p25);
      CHECK(s.p25 <= s.p50);
      CHECK(s.p50 <= s.p75);
      CHECK(s.p75 <= s.p95);
      CHECK(s.p95 <= s.max);
      CHECK(s.valid_fraction == 1.0);
    }
  }

  TEST_CASE("all-black image has no valid grvi pixel") {
    const auto map = compute_index(to_reflectance(RgbImage(3, 3)), IndexKind::grvi);
    CHECK(map.valid_count() == 0);
    CHECK_THROWS_AS(summarize_index(map), Error);
    try {
      render_heatmap(map);
      FAIL("expected EmptyMask");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::empty_mask);
    }
  }

  TEST_CASE("summary json round trip") {
    const auto map = compute_index(to_reflectance(testing::solid_image(2, 2, 10, 200, 30)), IndexKind::grvi);
    const auto s = summarize_index(map);
    const auto back = summary_from_json(to_json(s));
    CHECK(back.kind == s.kind);
    CHECK(back.mean == s.mean);
    CHECK(back.p75 == s.p75);
    CHECK(back.valid_fraction == s.valid_fraction);
  }

  TEST_CASE("index kind parsing") {
    CHECK(parse_index_kind("TGI") == IndexKind::tgi);
    CHECK(parse_index_kind("grvi") == IndexKind::grvi);
    CHECK_THROWS_AS(parse_index_kind("ndvi"), Error);
  }

  TEST_CASE("diverging ramp is red to white to blue") {
    CHECK(diverging_color(0.0) == std::array<std::uint8_t, 3>{255, 0, 0});
    CHECK(diverging_color(0.5) == std::array<std::uint8_t, 3>{255, 255, 255});
    CHECK(diverging_color(1.0) == std::array<std::uint8_t, 3>{0, 0, 255});
    CHECK(diverging_color(-3.0) == diverging_color(0.0));
    CHECK(diverging_color(7.0) == diverging_color(1.0));
    // Red falls and blue rises monotonically along the ramp.
    auto prev = diverging_color(0.0);
    for (int i = 1; i <= 100; ++i) {
      const auto c = diverging_color(i / 100.0);
      CHECK(c[0] <= prev[0]);
      CHECK(c[2] >= prev[2]);
      prev = c;
    }
  }

  TEST_CASE("heatmap preserves geometry and orders colours by value") {
    std::mt19937_64 rng(3);
    const auto img = random_image(rng, 13, 7);
    const auto map = compute_index(to_reflectance(img), IndexKind::tgi);
    const auto heat = decode_rgb(render_heatmap(map));
    REQUIRE(heat.width() == 13);
    REQUIRE(heat.height() == 7);
    const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
    const auto lo_i = static_cast<int>(lo - map.values.begin());
    const auto hi_i = static_cast<int>(hi - map.values.begin());
    CHECK(heat.at(lo_i % 13, lo_i / 13)[0] == 255);
    CHECK(heat.at(lo_i % 13, lo_i / 13)[2] == 0);
    CHECK(heat.at(hi_i % 13, hi_i / 13)[2] == 255);
    CHECK(heat.at(hi_i % 13, hi_i / 13)[0] == 0);
  }

  TEST_CASE("flat valid map renders white") {
    const auto map = compute_index(to_reflectance(testing::solid_image(4, 4, 90, 90, 90)), IndexKind::tgi);
    const auto heat = render_heatmap_image(map);
    for (int y = 0; y < 4; ++y) {
      for (int x = 0; x < 4; ++x) CHECK(heat.at(x, y)[1] == 255);
    }
  }

  TEST_CASE("png round trip is lossless") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 10; ++i) {
      const auto img = random_image(rng, 1 + static_cast<int>(rng() % 40), 1 + static_cast<int>(rng() % 40));
      CHECK(decode_rgb(encode_png(img)) == img);
    }
  }

  TEST_CASE("undecodable bytes are rejected") {
    const std::vector<std::uint8_t> junk{0x89, 'P', 'N', 'G', 0, 1, 2};
    try {
      decode_rgb(junk);
      FAIL("expected DecodeError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::decode_error);
    }
    CHECK_THROWS_AS(decode_rgb(std::vector<std::uint8_t>{}), Error);
  }

  TEST_CASE("bilinear resize keeps a constant image constant") {
    const auto img = testing::solid_image(7, 5, 12, 34, 56);
    const auto out = resize_bilinear(img, 19, 3);
    CHECK(out == testing::solid_image(19, 3, 12, 34, 56));
    CHECK(resize_bilinear(img, 7, 5) == img);
  }

  TEST_CASE("zero-sized images are invalid") {
    CHECK_THROWS_AS(RgbImage(0, 3), Error);
    CHECK_THROWS_AS(RgbImage(2, 2, std::vector<std::uint8_t>(5)), Error);
  }
}
