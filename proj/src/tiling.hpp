// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "raster.hpp"

namespace fforge {

inline constexpr std::size_t kTileSize = 256;
inline constexpr std::size_t kTileGrid = 3;

// 3x3 overlapping grid; tiles are stored row-major over (row offset, col offset).
struct TileSet {
  std::size_t parent_h = 0;
  std::size_t parent_w = 0;
  std::size_t tile = kTileSize;
  std::array<std::size_t, kTileGrid> row_offsets{};
  std::array<std::size_t, kTileGrid> col_offsets{};
  std::vector<MultiBandImage> tiles;
};

// {0, floor((D - tile)/2), D - tile}
std::array<std::size_t, kTileGrid> tile_offsets(std::size_t parent, std::size_t tile = kTileSize);

TileSet slice(const MultiBandImage& image, std::size_t tile = kTileSize);

// Per-pixel mean of every tile covering the pixel. The parent id/geotransform are not
// recoverable from tiles; callers set them.
MultiBandImage reassemble(const TileSet& tiles);

// Number of tiles covering each parent pixel, row-major H x W.
std::vector<std::size_t> coverage_counts(const TileSet& tiles);

}  // namespace fforge
