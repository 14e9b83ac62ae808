// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "tiling.hpp"

#include <algorithm>
#include <string>

#include "error.hpp"

namespace fforge {

namespace {

void check_offsets(const std::array<std::size_t, kTileGrid>& off, std::size_t parent, std::size_t tile) {
  if (tile == 0 || parent < tile) throw ValidationError("tiling: parent smaller than tile");
  if (off.front() != 0 || off.back() + tile != parent) {
    throw ValidationError("tiling: offsets do not span the parent extent");
  }
  for (std::size_t i = 1; i < off.size(); ++i) {
    if (off[i] < off[i - 1] || off[i] > off[i - 1] + tile) {
      throw ValidationError("tiling: offsets leave a gap or are not increasing");
    }
  }
}

}  // namespace

std::array<std::size_t, kTileGrid> tile_offsets(std::size_t parent, std::size_t tile) {
  if (tile == 0 || parent < tile) {
    throw ValidationError("tiling: parent dimension " + std::to_string(parent) +
                          " smaller than tile " + std::to_string(tile));
  }
  return {0, (parent - tile) / 2, parent - tile};
}

TileSet slice(const MultiBandImage& image, std::size_t tile) {
  TileSet ts;
  ts.parent_h = image.height();
  ts.parent_w = image.width();
  ts.tile = tile;
  ts.row_offsets = tile_offsets(image.height(), tile);
  ts.col_offsets = tile_offsets(image.width(), tile);
  ts.tiles.reserve(kTileGrid * kTileGrid);
  for (std::size_t i = 0; i < kTileGrid; ++i) {
    for (std::size_t j = 0; j < kTileGrid; ++j) {
      const std::size_t r0 = ts.row_offsets[i], c0 = ts.col_offsets[j];
      MultiBandImage t(image.image_id() + "_t" + std::to_string(i * kTileGrid + j), image.bands(), tile, tile);
      for (std::size_t b = 0; b < image.bands(); ++b) {
        for (std::size_t r = 0; r < tile; ++r) {
          const float* src = &image.band(b)[(r0 + r) * image.width() + c0];
          std::copy(src, src + tile, &t.band(b)[r * tile]);
        }
      }
      ts.tiles.push_back(std::move(t));
    }
  }
  return ts;
}

std::vector<std::size_t> coverage_counts(const TileSet& ts) {
  check_offsets(ts.row_offsets, ts.parent_h, ts.tile);
  check_offsets(ts.col_offsets, ts.parent_w, ts.tile);
  std::vector<std::size_t> count(ts.parent_h * ts.parent_w, 0);
  for (std::size_t i = 0; i < kTileGrid; ++i)
    for (std::size_t j = 0; j < kTileGrid; ++j)
      for (std::size_t r = 0; r < ts.tile; ++r)
        for (std::size_t c = 0; c < ts.tile; ++c)
          ++count[(ts.row_offsets[i] + r) * ts.parent_w + ts.col_offsets[j] + c];
  return count;
}

MultiBandImage reassemble(const TileSet& ts) {
  if (ts.tiles.size() != kTileGrid * kTileGrid) throw ValidationError("reassemble: expected 9 tiles");
  const std::size_t bands = ts.tiles.front().bands();
  for (const auto& t : ts.tiles) {
    if (t.bands() != bands || t.height() != ts.tile || t.width() != ts.tile) {
      throw ValidationError("reassemble: tile shape inconsistent with TileSet");
    }
  }
  const auto count = coverage_counts(ts);
  const std::size_t plane = ts.parent_h * ts.parent_w;
  std::vector<double> acc(bands * plane, 0.0);
  for (std::size_t i = 0; i < kTileGrid; ++i) {
    for (std::size_t j = 0; j < kTileGrid; ++j) {
      const auto& t = ts.tiles[i * kTileGrid + j];
      for (std::size_t b = 0; b < bands; ++b) {
        auto src = t.band(b);
        for (std::size_t r = 0; r < ts.tile; ++r) {
          double* dst = &acc[b * plane + (ts.row_offsets[i] + r) * ts.parent_w + ts.col_offsets[j]];
          const float* s = &src[r * ts.tile];
          for (std::size_t c = 0; c < ts.tile; ++c) dst[c] += s[c];
        }
      }
    }
  }
  MultiBandImage out("reassembled", bands, ts.parent_h, ts.parent_w);
  auto& s = out.samples();
  for (std::size_t b = 0; b < bands; ++b)
    for (std::size_t p = 0; p < plane; ++p)
      s[b * plane + p] = static_cast<float>(acc[b * plane + p] / static_cast<double>(count[p]));
  return out;
}

}  // namespace fforge
