// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "raster.hpp"

namespace fforge {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

// Closed ring: front() == back().
using Ring = std::vector<Point>;

struct Polygon {
  Ring exterior;
  std::vector<Ring> holes;
  bool operator==(const Polygon&) const = default;
};

// Polyline used for road strokes.
using LineString = std::vector<Point>;

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(std::size_t height, std::size_t width) : height_(height), width_(width), bits_(height * width, 0) {}

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return bits_.size(); }

  bool get(std::size_t r, std::size_t c) const { return bits_[r * width_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v = true) { bits_[r * width_ + c] = v ? 1 : 0; }
  std::vector<std::uint8_t>& bits() { return bits_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  std::size_t popcount() const;
  bool operator==(const BinaryMask&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Signed shoelace area (positive for counter-clockwise in x-right/y-up axes).
double ring_signed_area(const Ring& ring);
// |exterior| - sum |holes|.
double polygon_area(const Polygon& polygon);

// WKT subset: "POLYGON ((x y, ...), (hole ...))" and "POLYGON EMPTY". Returns
// nullopt for EMPTY; throws ValidationError naming the byte offset otherwise.
std::optional<Polygon> parse_wkt(std::string_view text);
// Shortest round-trip decimal formatting of each coordinate.
std::string to_wkt(const Polygon& polygon);
inline constexpr std::string_view kEmptyPolygonWkt = "POLYGON EMPTY";

// Pixel (r,c) is set iff its center (c+0.5, r+0.5) lies inside any polygon (even-odd).
BinaryMask rasterize(const std::vector<Polygon>& polygons, std::size_t height, std::size_t width);
void rasterize_into(const Polygon& polygon, BinaryMask& mask);
// Pixels whose center is within width/2 of any segment of the line.
void rasterize_stroke(const LineString& line, double width, BinaryMask& mask);

// One polygon per 8-connected foreground component, traced along pixel edges.
// Exterior rings start at the top-left corner and run clockwise on screen (east first).
std::vector<Polygon> extract_polygons(const BinaryMask& mask);
// Groups polygons whose rasterized footprints share a pixel (transitively) and retraces each group.
std::vector<Polygon> merge_intersecting(const std::vector<Polygon>& polygons, std::size_t height,
                                        std::size_t width);

double mask_iou(const BinaryMask& a, const BinaryMask& b);

Point pixel_to_geo(const GeoTransform& gt, double col, double row);
// Returns (col,row). Throws ValidationError on a singular transform.
Point geo_to_pixel(const GeoTransform& gt, double x_geo, double y_geo);
Polygon polygon_to_pixel(const GeoTransform& gt, const Polygon& geo);

// Map layer read from a GeoJSON FeatureCollection/Feature/geometry object.
struct GeoLayer {
  std::vector<Polygon> polygons;
  std::vector<LineString> lines;
};
GeoLayer parse_geojson(std::string_view text);
GeoLayer load_geojson(const std::string& path);
std::string to_geojson(const GeoLayer& layer);

}  // namespace fforge
