// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "ensemble.hpp"

#include <algorithm>

#include "error.hpp"
#include "labeling.hpp"

namespace fforge {

namespace {

constexpr std::size_t kMulBands = 8;
constexpr std::size_t kRgbBands = 3;

void require_bands(const MultiBandImage& im, std::size_t bands, const char* what) {
  if (im.bands() != bands) {
    throw ValidationError(std::string(what) + " for '" + im.image_id() + "' must have " + std::to_string(bands) +
                          " bands, got " + std::to_string(im.bands()));
  }
}

std::vector<MultiBandImage> center_all(std::vector<MultiBandImage> tiles, const ModelVariant& v) {
  if (v.mean_image) {
    for (auto& t : tiles) t = center(t, *v.mean_image);
  }
  return tiles;
}

}  // namespace

std::string variant_name(VariantId id) {
  switch (id) {
    case VariantId::kV1:
      return "v1";
    case VariantId::kV2:
      return "v2";
    case VariantId::kV3:
      return "v3";
  }
  return "?";
}

VariantId parse_variant(const std::string& name) {
  if (name == "v1") return VariantId::kV1;
  if (name == "v2") return VariantId::kV2;
  if (name == "v3") return VariantId::kV3;
  throw ValidationError("unknown model variant '" + name + "' (expected v1, v2 or v3)");
}

ModelVariant make_variant(VariantId id) {
  ModelVariant v;
  v.id = id;
  v.tiled = id != VariantId::kV1;
  v.in_channels = id == VariantId::kV3 ? 10 : 8;
  return v;
}

MultiBandImage assemble_v1(const MultiBandImage& rgb, const MultiBandImage& mul, std::size_t input_size) {
  require_bands(rgb, kRgbBands, "RGB raster");
  require_bands(mul, kMulBands, "multispectral raster");
  if (rgb.height() != mul.height() || rgb.width() != mul.width()) {
    throw ValidationError("RGB and multispectral rasters of '" + mul.image_id() + "' differ in size");
  }
  MultiBandImage stacked = stack_bands(rgb, select_bands(mul, kV1MulBands));
  stacked.set_image_id(mul.image_id());
  return resize(stacked, input_size, input_size, ResizeMethod::kBilinear);
}

std::vector<MultiBandImage> assemble_v2(const MultiBandImage& mul, std::size_t tile) {
  require_bands(mul, kMulBands, "multispectral raster");
  return std::move(slice(mul, tile).tiles);
}

MultiBandImage map_layer_channels(const GeoLayer& buildings, const GeoLayer& roads, const GeoTransform& gt,
                                  std::size_t height, std::size_t width) {
  if (!gt.invertible()) throw ValidationError("map layers: singular geotransform");
  BinaryMask bmask(height, width), rmask(height, width);
  for (const auto& p : buildings.polygons) rasterize_into(polygon_to_pixel(gt, p), bmask);
  for (const auto& p : roads.polygons) rasterize_into(polygon_to_pixel(gt, p), rmask);
  for (const auto& line : roads.lines) {
    LineString px;
    px.reserve(line.size());
    for (const auto& pt : line) px.push_back(geo_to_pixel(gt, pt.x, pt.y));
    rasterize_stroke(px, kRoadStrokeWidth, rmask);
  }
  MultiBandImage out("layers", 2, height, width);
  auto b0 = out.band(0);
  auto b1 = out.band(1);
  for (std::size_t i = 0; i < height * width; ++i) {
    b0[i] = bmask.bits()[i] ? 1.0f : 0.0f;
    b1[i] = rmask.bits()[i] ? 1.0f : 0.0f;
  }
  return out;
}

std::vector<MultiBandImage> assemble_v3(const MultiBandImage& mul, const GeoLayer& buildings,
                                        const GeoLayer& roads, std::size_t tile) {
  require_bands(mul, kMulBands, "multispectral raster");
  if (!mul.geotransform()) {
    throw ValidationError("v3 needs a geotransform on '" + mul.image_id() + "' to place map layers");
  }
  MultiBandImage layers = map_layer_channels(buildings, roads, *mul.geotransform(), mul.height(), mul.width());
  MultiBandImage stacked = stack_bands(mul, layers);
  stacked.set_image_id(mul.image_id());
  return std::move(slice(stacked, tile).tiles);
}

MultiBandImage prepare_v1(const MultiBandImage& rgb, const MultiBandImage& mul, const ModelVariant& variant,
                          std::size_t input_size) {
  MultiBandImage x = assemble_v1(rgb, mul, input_size);
  if (variant.mean_image) x = center(x, *variant.mean_image);
  return x;
}

std::vector<MultiBandImage> prepare_v2(const MultiBandImage& mul, const ModelVariant& variant, std::size_t tile) {
  return center_all(assemble_v2(mul, tile), variant);
}

std::vector<MultiBandImage> prepare_v3(const MultiBandImage& mul, const GeoLayer& buildings, const GeoLayer& roads,
                                       const ModelVariant& variant, std::size_t tile) {
  return center_all(assemble_v3(mul, buildings, roads, tile), variant);
}

MultiBandImage combine(std::span<const MultiBandImage> predictions) {
  if (predictions.empty()) throw ValidationError("combine: no predictions");
  const auto& first = predictions.front();
  for (const auto& p : predictions) {
    if (p.bands() != 1 || !p.same_shape(first)) {
      throw ValidationError("combine: prediction '" + p.image_id() + "' differs in size or band count");
    }
  }
  if (predictions.size() == 1) return first;
  MultiBandImage out = first;
  const double n = static_cast<double>(predictions.size());
  auto& s = out.samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    double acc = 0.0;
    for (const auto& p : predictions) acc += p.samples()[i];
    s[i] = static_cast<float>(acc / n);
  }
  return out;
}

std::vector<Polygon> footprints_from_prediction(const MultiBandImage& prediction, double threshold,
                                                double min_area) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("threshold must lie in (0,1)");
  if (min_area < 0.0) throw ValidationError("min_area must be >= 0");
  if (prediction.bands() != 1) throw ValidationError("prediction raster must have one band");
  const BinaryMask mask = threshold_mask(prediction.band(0), prediction.height(), prediction.width(), threshold);
  auto merged = merge_intersecting(extract_polygons(mask), prediction.height(), prediction.width());
  std::vector<Polygon> kept;
  for (auto& p : merged) {
    if (polygon_area(p) >= min_area) kept.push_back(std::move(p));
  }
  return kept;
}

}  // namespace fforge
