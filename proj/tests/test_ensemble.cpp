// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <bit>

#include "ensemble.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "support/oracles.hpp"

using namespace fforge;
using fforge::testing::rect;

namespace {

MultiBandImage random_prediction(Rng& rng, std::size_t h, std::size_t w) {
  MultiBandImage p("img", 1, h, w);
  const BinaryMask m = fforge::testing::random_blob_mask(rng, h, w, 4);
  for (std::size_t i = 0; i < m.size(); ++i)
    p.samples()[i] = static_cast<float>(m.bits()[i] ? rng.uniform(0.5, 1.0) : rng.uniform(0.0, 0.5));
  return p;
}

}  // namespace

TEST(Variant, ChannelCountsAndNames) {
  EXPECT_EQ(make_variant(VariantId::kV1).in_channels, 8u);
  EXPECT_FALSE(make_variant(VariantId::kV1).tiled);
  EXPECT_EQ(make_variant(VariantId::kV2).in_channels, 8u);
  EXPECT_TRUE(make_variant(VariantId::kV2).tiled);
  EXPECT_EQ(make_variant(VariantId::kV3).in_channels, 10u);
  EXPECT_EQ(parse_variant(variant_name(VariantId::kV3)), VariantId::kV3);
  EXPECT_THROW(parse_variant("v4"), ValidationError);
}

TEST(Variant, V1StacksRgbAndFiveMultispectralBands) {
  MultiBandImage rgb("a", 3, 4, 4), mul("a", 8, 4, 4);
  for (std::size_t b = 0; b < 3; ++b)
    for (auto& v : rgb.band(b)) v = 100.0f + float(b);
  for (std::size_t b = 0; b < 8; ++b)
    for (auto& v : mul.band(b)) v = float(b);
  const MultiBandImage x = assemble_v1(rgb, mul, 8);
  ASSERT_EQ(x.bands(), 8u);
  EXPECT_EQ(x.height(), 8u);
  const std::vector<float> want{100, 101, 102, kCoastal, kYellow, kRed, kRedEdge, kNearIr1};
  for (std::size_t b = 0; b < 8; ++b) EXPECT_EQ(x.at(b, 3, 5), want[b]);
  EXPECT_THROW(assemble_v1(mul, mul), ValidationError);
}

TEST(Variant, V3AddsRasterizedMapLayers) {
  MultiBandImage mul("a", 8, 256, 256);
  GeoTransform gt;
  gt.c = {1000.0, 2.0, 0.0, 5000.0, 0.0, -2.0};
  mul.set_geotransform(gt);
  GeoLayer buildings, roads;
  // Geo box covering pixel columns 10..19, rows 5..9.
  buildings.polygons.push_back(rect(1020.0, 4980.0, 1040.0, 4990.0));
  roads.lines.push_back({{1000.0, 4900.0}, {1512.0, 4900.0}});  // pixel row 50
  const auto tiles = assemble_v3(mul, buildings, roads);
  ASSERT_EQ(tiles.size(), 9u);
  const MultiBandImage& t = tiles[0];
  EXPECT_EQ(t.bands(), 10u);
  EXPECT_EQ(t.at(8, 7, 15), 1.0f);
  EXPECT_EQ(t.at(8, 7, 25), 0.0f);
  EXPECT_EQ(t.at(9, 50, 100), 1.0f);
  EXPECT_EQ(t.at(9, 49, 100), 1.0f);
  EXPECT_EQ(t.at(9, 52, 100), 0.0f);
  MultiBandImage nogeo("b", 8, 256, 256);
  EXPECT_THROW(assemble_v3(nogeo, buildings, roads), ValidationError);
}

TEST(Variant, PrepareSubtractsMeanImage) {
  MultiBandImage mul("a", 8, 256, 256, 2.0f);
  ModelVariant v = make_variant(VariantId::kV2);
  v.mean_image = MultiBandImage("mean", 8, 256, 256, 0.5f);
  for (const auto& t : prepare_v2(mul, v))
    for (float s : t.samples()) EXPECT_EQ(s, 1.5f);
}

TEST(Combine, IdenticalInputsAreAFixedPoint) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const MultiBandImage p = random_prediction(rng, 20 + rng.below(30), 20 + rng.below(30));
    const std::vector<MultiBandImage> three{p, p, p};
    const MultiBandImage c = combine(three);
    ASSERT_TRUE(c.same_shape(p));
    for (std::size_t i = 0; i < p.samples().size(); ++i)
      ASSERT_EQ(std::bit_cast<std::uint32_t>(c.samples()[i]), std::bit_cast<std::uint32_t>(p.samples()[i]));
    EXPECT_EQ(footprints_from_prediction(c, 0.5, 5.0), footprints_from_prediction(p, 0.5, 5.0));
  }
}

TEST(Combine, AveragesAndValidates) {
  MultiBandImage a("a", 1, 1, 2, std::vector<float>{0.0f, 1.0f});
  MultiBandImage b("a", 1, 1, 2, std::vector<float>{0.5f, 0.0f});
  const std::vector<MultiBandImage> two{a, b};
  EXPECT_EQ(combine(two).samples(), (std::vector<float>{0.25f, 0.5f}));
  const std::vector<MultiBandImage> bad{a, MultiBandImage("c", 1, 2, 1)};
  EXPECT_THROW(combine(bad), ValidationError);
  EXPECT_THROW(combine(std::span<const MultiBandImage>()), ValidationError);
}

TEST(Footprints, ThresholdMergeAndMinArea) {
  MultiBandImage p("img", 1, 10, 10, 0.1f);
  for (std::size_t r = 1; r < 5; ++r)
    for (std::size_t c = 1; c < 5; ++c) p.at(0, r, c) = 0.9f;  // 16 px
  p.at(0, 8, 8) = 0.7f;                                         // 1 px
  p.at(0, 8, 1) = 0.5f;                                         // at threshold: background
  const auto all = footprints_from_prediction(p, 0.5, 0.0);
  EXPECT_EQ(all.size(), 2u);
  const auto big = footprints_from_prediction(p, 0.5, 16.0);
  ASSERT_EQ(big.size(), 1u);
  EXPECT_DOUBLE_EQ(polygon_area(big[0]), 16.0);
  EXPECT_TRUE(footprints_from_prediction(p, 0.5, 17.0).empty());
  EXPECT_THROW(footprints_from_prediction(p, 1.0, 0.0), ValidationError);
  EXPECT_THROW(footprints_from_prediction(p, 0.5, -1.0), ValidationError);
}
