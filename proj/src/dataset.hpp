// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "raster.hpp"

namespace fforge {

struct ManifestEntry {
  std::string image_id;
  std::filesystem::path rgb;
  std::filesystem::path mul;
  std::filesystem::path footprints;
  std::optional<std::filesystem::path> buildings;
  std::optional<std::filesystem::path> roads;
  std::optional<GeoTransform> geotransform;
};

struct Manifest {
  std::string city;
  std::vector<ManifestEntry> entries;  // paths absolute after load

  const ManifestEntry& entry(const std::string& image_id) const;
};

// Relative paths are resolved against the manifest's directory; referenced files must exist.
Manifest load_manifest(const std::filesystem::path& path);
// Paths are written relative to the manifest's directory when possible.
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

struct DatasetSplit {
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  const std::vector<std::string>& subset(const std::string& name) const;
};

// test = round(0.2 n), val = round(0.3 (n - test)), halves rounded up.
std::size_t split_test_count(std::size_t n);
std::size_t split_val_count(std::size_t remaining);

DatasetSplit split(const Manifest& manifest, std::uint64_t seed);
void save_split(const DatasetSplit& s, const std::filesystem::path& path);
DatasetSplit load_split(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// summaryData CSV: ImageId,BuildingId,PolygonWKT_Pix

struct FootprintRecord {
  std::string image_id;
  std::int64_t building_id = 0;
  Polygon polygon;
};

enum class ZeroAreaPolicy {
  kKeepWithWarning,  // ground truth
  kDrop,             // predictions
};

using FootprintTable = std::map<std::string, std::vector<FootprintRecord>>;

FootprintTable parse_summary_csv(const std::string& text, ZeroAreaPolicy policy = ZeroAreaPolicy::kKeepWithWarning,
                                 std::vector<std::string>* warnings = nullptr);
FootprintTable read_summary_csv(const std::filesystem::path& path,
                                ZeroAreaPolicy policy = ZeroAreaPolicy::kKeepWithWarning,
                                std::vector<std::string>* warnings = nullptr);

struct ImageFootprints {
  std::string image_id;
  std::vector<Polygon> polygons;
};

// Building ids 1..k per image; images without polygons get one "-1,POLYGON EMPTY" row.
std::string format_summary_csv(const std::vector<ImageFootprints>& predictions);
void write_predictions_csv(const std::vector<ImageFootprints>& predictions, const std::filesystem::path& path);

std::vector<Polygon> polygons_of(const std::vector<FootprintRecord>& records);

// ---------------------------------------------------------------------------
// Synthetic scenes

struct SynthOptions {
  std::uint64_t seed = 0;
  std::size_t n_images = 20;
  std::size_t size = 650;
  std::size_t bands = 8;
  double building_density = 0.12;  // target fraction of image area covered by roofs
  std::size_t min_building = 10;   // side length range, px
  std::size_t max_building = 28;
  std::size_t gap = 3;             // minimum clearance between buildings and roads, px
  double layer_keep = 0.8;         // fraction of buildings present in the map layer
  std::string city = "synth";
};

struct SynthImage {
  std::string image_id;
  MultiBandImage rgb;
  MultiBandImage mul;
  std::vector<Polygon> buildings;  // pixel coordinates
  std::vector<LineString> roads;   // pixel coordinates
  BinaryMask building_mask;        // what the imagery was drawn from
};

// In-memory generation; deterministic for a given seed.
std::vector<SynthImage> synth_images(const SynthOptions& options);

// Writes manifest.json, rasters/, summaryData.csv, buildings.geojson, roads.geojson.
Manifest synth_dataset(const SynthOptions& options, const std::filesystem::path& out_dir);

}  // namespace fforge
