// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "geometry.hpp"
#include "raster.hpp"

namespace fforge {

inline constexpr double kDefaultTau = 3.0;

// H x W field, row-major.
struct DistanceField {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
};

struct LabelImage {
  std::size_t height = 0;
  std::size_t width = 0;
  double tau = kDefaultTau;
  std::vector<float> values;  // in [0,1]

  float at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
  MultiBandImage to_raster(std::string image_id) const;
};

// Exact squared Euclidean distance from every pixel to the nearest `target` pixel
// (separable lower-envelope transform: row pass then column pass). Pixels with no
// target anywhere get +infinity.
std::vector<double> squared_distance_to(const BinaryMask& mask, bool target);

// +distance to the nearest background pixel inside, -distance to the nearest foreground
// pixel outside. Degenerate masks are capped at +/-(H+W).
DistanceField signed_distance(const BinaryMask& mask);

// (clamp(d/tau, -1, 1) + 1) / 2
LabelImage encode_label(const DistanceField& distance, double tau);

LabelImage build_label(const std::vector<Polygon>& footprints, std::size_t height, std::size_t width,
                       double tau = kDefaultTau);

// Pixels with value > threshold.
BinaryMask threshold_mask(std::span<const float> values, std::size_t height, std::size_t width,
                          double threshold = 0.5);

}  // namespace fforge
