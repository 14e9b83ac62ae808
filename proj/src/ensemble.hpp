// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "raster.hpp"
#include "tiling.hpp"

namespace fforge {

enum class VariantId { kV1, kV2, kV3 };

std::string variant_name(VariantId id);
VariantId parse_variant(const std::string& name);

// Multispectral band order of the 8-band product.
enum MulBand : std::size_t {
  kCoastal = 0,
  kBlue = 1,
  kGreen = 2,
  kYellow = 3,
  kRed = 4,
  kRedEdge = 5,
  kNearIr1 = 6,
  kNearIr2 = 7,
};

// v1 keeps R,G,B from the RGB product plus these multispectral bands.
inline constexpr std::array<std::size_t, 5> kV1MulBands{kCoastal, kYellow, kRed, kRedEdge, kNearIr1};
inline constexpr double kRoadStrokeWidth = 3.0;
inline constexpr double kDefaultThreshold = 0.5;

struct ModelVariant {
  VariantId id = VariantId::kV1;
  bool tiled = false;
  std::size_t in_channels = 8;
  std::optional<MultiBandImage> mean_image;
};

ModelVariant make_variant(VariantId id);

// Uncentered model inputs. v1 resizes to `input_size` (bilinear); v2/v3 slice with `tile`.
MultiBandImage assemble_v1(const MultiBandImage& rgb, const MultiBandImage& mul, std::size_t input_size = kTileSize);
std::vector<MultiBandImage> assemble_v2(const MultiBandImage& mul, std::size_t tile = kTileSize);
std::vector<MultiBandImage> assemble_v3(const MultiBandImage& mul, const GeoLayer& buildings,
                                        const GeoLayer& roads, std::size_t tile = kTileSize);

// Two binary channels (buildings filled, roads stroked) on the raster grid of `gt`.
MultiBandImage map_layer_channels(const GeoLayer& buildings, const GeoLayer& roads, const GeoTransform& gt,
                                  std::size_t height, std::size_t width);

// Assembled inputs minus the variant mean image (when the variant carries one).
MultiBandImage prepare_v1(const MultiBandImage& rgb, const MultiBandImage& mul, const ModelVariant& variant,
                          std::size_t input_size = kTileSize);
std::vector<MultiBandImage> prepare_v2(const MultiBandImage& mul, const ModelVariant& variant,
                                       std::size_t tile = kTileSize);
std::vector<MultiBandImage> prepare_v3(const MultiBandImage& mul, const GeoLayer& buildings, const GeoLayer& roads,
                                       const ModelVariant& variant, std::size_t tile = kTileSize);

// Per-pixel mean of single-band predictions of equal size.
MultiBandImage combine(std::span<const MultiBandImage> predictions);

// Binarize (> threshold), trace components, merge overlapping ones, drop area < min_area.
std::vector<Polygon> footprints_from_prediction(const MultiBandImage& prediction,
                                                double threshold = kDefaultThreshold, double min_area = 0.0);

}  // namespace fforge
