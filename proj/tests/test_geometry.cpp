// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>

#include "error.hpp"
#include "geometry.hpp"
#include "rng.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace fforge;
using fforge::testing::rect;

namespace {

std::string error_of(std::string_view wkt) {
  try {
    parse_wkt(wkt);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Wkt, ParsesPolygonWithHole) {
  const auto p = parse_wkt("POLYGON ((0 0, 10 0, 10 10, 0 10, 0 0), (2 2, 2 4, 4 4, 4 2, 2 2))");
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->exterior.size(), 5u);
  ASSERT_EQ(p->holes.size(), 1u);
  EXPECT_EQ(p->holes[0][1], (Point{2, 4}));
  EXPECT_DOUBLE_EQ(polygon_area(*p), 96.0);
}

TEST(Wkt, AcceptsLooseSpacingCaseAndSigns) {
  const auto p = parse_wkt("  polygon((+1.5 -2e1,3 -20 ,3 1,1.5 -20))  ");
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->exterior[0], (Point{1.5, -20.0}));
}

TEST(Wkt, EmptyPolygon) {
  EXPECT_FALSE(parse_wkt("POLYGON EMPTY").has_value());
  EXPECT_FALSE(parse_wkt("polygon empty").has_value());
  EXPECT_EQ(kEmptyPolygonWkt, "POLYGON EMPTY");
}

TEST(Wkt, ErrorsNameByteOffset) {
  EXPECT_NE(error_of("POINT (1 2)").find("byte 0"), std::string::npos);
  EXPECT_NE(error_of("POLYGON ((0 0, 1 0, 1 1, 0 0").find("byte 28"), std::string::npos);
  EXPECT_NE(error_of("POLYGON ((0 0, 1 0, 1 x, 0 0))").find("byte 22"), std::string::npos);
  // Unclosed and short rings point at the ring's opening parenthesis.
  EXPECT_NE(error_of("POLYGON ((0 0, 1 0, 1 1, 0 1))").find("byte 9"), std::string::npos);
  EXPECT_NE(error_of("POLYGON ((0 0, 1 0, 0 0))").find("at least 4"), std::string::npos);
  EXPECT_NE(error_of("POLYGON ((0 0, 1 0, 1 1, 0 0)) junk").find("trailing"), std::string::npos);
  EXPECT_NE(error_of("POLYGON ((0 0, 1 0, nan 1, 0 0))").find("byte"), std::string::npos);
  EXPECT_NE(error_of("").find("byte 0"), std::string::npos);
}

TEST(Wkt, RoundTripIsVertexExact) {
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    Polygon p = fforge::testing::random_star(rng, rng.uniform(-1e6, 1e6), rng.uniform(-1e6, 1e6),
                                             rng.uniform(1e-3, 1e3), 3 + rng.below(12));
    if (i % 3 == 0) p.holes.push_back(fforge::testing::random_star(rng, 0.1, 0.2, 1e-4, 4).exterior);
    const auto back = parse_wkt(to_wkt(p));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, p) << to_wkt(p);
  }
}

TEST(Wkt, FormatDropsNegativeZero) {
  const Polygon p = rect(-0.0, 0, 1, 1);
  EXPECT_EQ(to_wkt(p), "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))");
}

TEST(Area, ShoelaceSignAndHoles) {
  Ring ccw{{0, 0}, {2, 0}, {2, 3}, {0, 3}, {0, 0}};
  EXPECT_DOUBLE_EQ(ring_signed_area(ccw), 6.0);
  Ring cw(ccw.rbegin(), ccw.rend());
  EXPECT_DOUBLE_EQ(ring_signed_area(cw), -6.0);
  Polygon p{cw, {Ring{{0.5, 0.5}, {1, 0.5}, {1, 1}, {0.5, 1}, {0.5, 0.5}}}};
  EXPECT_DOUBLE_EQ(polygon_area(p), 5.75);
}

TEST(Rasterize, PixelCenterRule) {
  // x in [0.5,2.5], y in [0.5,1.5]: only the centers (0.5,0.5) and (1.5,0.5) are inside.
  const BinaryMask m = rasterize({rect(0.5, 0.5, 2.5, 1.5)}, 3, 4);
  EXPECT_TRUE(m.get(0, 0));
  EXPECT_TRUE(m.get(0, 1));
  EXPECT_FALSE(m.get(0, 2));
  EXPECT_FALSE(m.get(1, 0));
  EXPECT_EQ(m.popcount(), 2u);
  // Integer rectangle covers exactly its cells.
  EXPECT_EQ(rasterize({rect(1, 1, 3, 4)}, 5, 5).popcount(), 6u);
  // Partially off-image polygons are clipped.
  EXPECT_EQ(rasterize({rect(-5, -5, 2, 2)}, 3, 3).popcount(), 4u);
}

TEST(Rasterize, MatchesCrossingNumberOracle) {
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t h = 5 + rng.below(30), w = 5 + rng.below(30);
    std::vector<Polygon> polys;
    const std::size_t k = 1 + rng.below(3);
    for (std::size_t i = 0; i < k; ++i) {
      Polygon p = fforge::testing::random_star(rng, rng.uniform(0, double(w)), rng.uniform(0, double(h)),
                                               rng.uniform(1.0, double(std::min(h, w))), 3 + rng.below(10));
      if (rng.below(3) == 0) {
        p.holes.push_back(fforge::testing::random_star(rng, p.exterior[0].x * 0.5 + p.exterior[1].x * 0.5,
                                                       p.exterior[0].y, 2.0, 5).exterior);
      }
      polys.push_back(p);
    }
    // A pixel covered by several polygons is set once; the oracle's "any polygon" rule agrees.
    EXPECT_EQ(rasterize(polys, h, w), fforge::testing::brute_rasterize(polys, h, w)) << "trial " << trial;
  }
}

TEST(Rasterize, StrokeWidth) {
  BinaryMask m(10, 10);
  rasterize_stroke({{0, 5}, {10, 5}}, 2.0, m);
  for (std::size_t c = 0; c < 10; ++c) {
    EXPECT_TRUE(m.get(4, c));
    EXPECT_TRUE(m.get(5, c));
    EXPECT_FALSE(m.get(3, c));
    EXPECT_FALSE(m.get(6, c));
  }
}

TEST(Extract, RoundTripsThroughRasterization) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t h = 1 + rng.below(24), w = 1 + rng.below(24);
    const BinaryMask m = trial % 2 ? fforge::testing::random_mask(rng, h, w, rng.uniform(0.1, 0.7))
                                   : fforge::testing::random_blob_mask(rng, h, w, 1 + rng.below(5));
    const auto polys = extract_polygons(m);
    EXPECT_EQ(rasterize(polys, h, w), m) << "trial " << trial;
    double area = 0.0;
    for (const auto& p : polys) area += polygon_area(p);
    EXPECT_DOUBLE_EQ(area, double(m.popcount()));
  }
}

TEST(Extract, EightConnectivity) {
  BinaryMask diag(3, 3);
  diag.set(0, 0);
  diag.set(1, 1);
  diag.set(2, 2);
  EXPECT_EQ(extract_polygons(diag).size(), 1u);

  BinaryMask apart(3, 3);
  apart.set(0, 0);
  apart.set(0, 2);
  EXPECT_EQ(extract_polygons(apart).size(), 2u);

  BinaryMask ring(5, 5);
  for (std::size_t r = 1; r < 4; ++r)
    for (std::size_t c = 1; c < 4; ++c) ring.set(r, c, !(r == 2 && c == 2));
  const auto polys = extract_polygons(ring);
  ASSERT_EQ(polys.size(), 1u);
  EXPECT_EQ(polys[0].holes.size(), 1u);
  EXPECT_DOUBLE_EQ(polygon_area(polys[0]), 8.0);

  EXPECT_TRUE(extract_polygons(BinaryMask(4, 4)).empty());
}

TEST(Merge, UnionsPolygonsSharingPixels) {
  const std::vector<Polygon> in{rect(0, 0, 3, 3), rect(2, 2, 5, 5), rect(7, 7, 9, 9), rect(4, 4, 6, 6)};
  const auto out = merge_intersecting(in, 10, 10);
  ASSERT_EQ(out.size(), 2u);
  BinaryMask expect = rasterize(in, 10, 10);
  EXPECT_EQ(rasterize(out, 10, 10), expect);
  std::vector<double> areas{polygon_area(out[0]), polygon_area(out[1])};
  std::sort(areas.begin(), areas.end());
  EXPECT_DOUBLE_EQ(areas[0], 4.0);
  EXPECT_DOUBLE_EQ(areas[1], 9.0 + 9.0 - 1.0 + 4.0 - 1.0);
}

TEST(Merge, TouchingEdgesDoNotMerge) {
  const auto out = merge_intersecting({rect(0, 0, 2, 2), rect(2, 0, 4, 2)}, 4, 4);
  EXPECT_EQ(out.size(), 2u);
}

TEST(Merge, NeverChangesCoverage) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Polygon> in;
    for (int i = 0; i < 6; ++i) in.push_back(fforge::testing::random_rect(rng, 20, 20, 8));
    const auto out = merge_intersecting(in, 20, 20);
    EXPECT_LE(out.size(), in.size());
    EXPECT_EQ(rasterize(out, 20, 20), rasterize(in, 20, 20));
    // Output groups are pairwise disjoint.
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = i + 1; j < out.size(); ++j)
        EXPECT_EQ(mask_iou(rasterize({out[i]}, 20, 20), rasterize({out[j]}, 20, 20)), 0.0);
  }
}

TEST(MaskIou, Basic) {
  const BinaryMask a = rasterize({rect(0, 0, 2, 2)}, 4, 4);
  const BinaryMask b = rasterize({rect(1, 0, 3, 2)}, 4, 4);
  EXPECT_DOUBLE_EQ(mask_iou(a, b), 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(mask_iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(mask_iou(BinaryMask(4, 4), BinaryMask(4, 4)), 0.0);
  EXPECT_THROW(mask_iou(a, BinaryMask(3, 4)), ValidationError);
}

TEST(GeoTransform, PixelGeoRoundTrip) {
  GeoTransform gt;
  gt.c = {500000.0, 0.3, 0.05, 4000000.0, -0.02, -0.3};
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const double col = rng.uniform(0, 650), row = rng.uniform(0, 650);
    const Point g = pixel_to_geo(gt, col, row);
    const Point back = geo_to_pixel(gt, g.x, g.y);
    EXPECT_NEAR(back.x, col, 1e-6);
    EXPECT_NEAR(back.y, row, 1e-6);
  }
  GeoTransform sing;
  sing.c = {0, 1, 1, 0, 1, 1};
  EXPECT_THROW(geo_to_pixel(sing, 0, 0), ValidationError);
}

TEST(GeoJson, ParsesPolygonsAndLines) {
  const auto layer = parse_geojson(R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}},
    {"type":"Feature","properties":{},"geometry":{"type":"MultiPolygon","coordinates":[[[[5,5],[6,5],[6,6],[5,5]]],[[[7,7],[8,7],[8,8],[7,7]]]]}},
    {"type":"Feature","properties":{},"geometry":{"type":"LineString","coordinates":[[0,0],[3,4]]}},
    {"type":"Feature","properties":{},"geometry":null}]})");
  EXPECT_EQ(layer.polygons.size(), 3u);
  ASSERT_EQ(layer.lines.size(), 1u);
  EXPECT_EQ(layer.lines[0][1], (Point{3, 4}));
  const auto again = parse_geojson(to_geojson(layer));
  EXPECT_EQ(again.polygons, layer.polygons);
  EXPECT_EQ(again.lines, layer.lines);
}

TEST(GeoJson, Errors) {
  EXPECT_THROW(parse_geojson("{not json"), ValidationError);
  EXPECT_THROW(parse_geojson(R"({"type":"Polygon","coordinates":[[[0,0],[1,0],[0,0]]]})"), ValidationError);
  EXPECT_THROW(load_geojson("/nonexistent/roads.geojson"), IoError);
}
