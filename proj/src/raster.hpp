// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fforge {

// Affine pixel -> geo map: x = c[0] + col*c[1] + row*c[2]; y = c[3] + col*c[4] + row*c[5].
struct GeoTransform {
  std::array<double, 6> c{0.0, 1.0, 0.0, 0.0, 0.0, 1.0};

  double determinant() const { return c[1] * c[5] - c[2] * c[4]; }
  bool invertible() const { return determinant() != 0.0; }
  bool operator==(const GeoTransform&) const = default;
};

// C x H x W float raster, band-sequential, row-major.
class MultiBandImage {
 public:
  MultiBandImage() = default;
  MultiBandImage(std::string image_id, std::size_t bands, std::size_t height, std::size_t width,
                 float fill = 0.0f);
  MultiBandImage(std::string image_id, std::size_t bands, std::size_t height, std::size_t width,
                 std::vector<float> samples);

  const std::string& image_id() const { return image_id_; }
  void set_image_id(std::string id) { image_id_ = std::move(id); }
  std::size_t bands() const { return bands_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t plane_size() const { return height_ * width_; }

  std::span<float> band(std::size_t b);
  std::span<const float> band(std::size_t b) const;
  float& at(std::size_t b, std::size_t r, std::size_t c) {
    return samples_[(b * height_ + r) * width_ + c];
  }
  float at(std::size_t b, std::size_t r, std::size_t c) const {
    return samples_[(b * height_ + r) * width_ + c];
  }

  std::vector<float>& samples() { return samples_; }
  const std::vector<float>& samples() const { return samples_; }

  const std::optional<GeoTransform>& geotransform() const { return geotransform_; }
  void set_geotransform(std::optional<GeoTransform> gt) { geotransform_ = gt; }

  bool same_shape(const MultiBandImage& o) const {
    return bands_ == o.bands_ && height_ == o.height_ && width_ == o.width_;
  }
  // Throws ValidationError if any sample is NaN/Inf.
  void check_finite() const;

 private:
  std::string image_id_;
  std::size_t bands_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> samples_;
  std::optional<GeoTransform> geotransform_;
};

struct BandStats {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
  double lo = 0.0;  // 2.28th percentile
  double hi = 0.0;  // 97.72nd percentile
};

inline constexpr double kLowPercentile = 2.28;
inline constexpr double kHighPercentile = 97.72;

enum class ResizeMethod { kNearest, kBilinear };

// Linear interpolation between closest ranks, rank = p/100 * (n-1).
double percentile(std::span<const double> values, double p);
double percentile(std::span<const float> values, double p);

// Population statistics of one channel pooled over every pixel of every image.
BandStats channel_stats(std::span<const MultiBandImage> images, std::size_t channel);

MultiBandImage clip_channel(const MultiBandImage& image, std::size_t channel, double lo, double hi);
MultiBandImage minmax_normalize(const MultiBandImage& image, std::size_t channel);
MultiBandImage mean_image(std::span<const MultiBandImage> images);
MultiBandImage center(const MultiBandImage& image, const MultiBandImage& mean);
MultiBandImage resize(const MultiBandImage& image, std::size_t out_h, std::size_t out_w,
                      ResizeMethod method);

// Channel subset in the given order; geotransform and id carried over.
MultiBandImage select_bands(const MultiBandImage& image, std::span<const std::size_t> bands);
// Concatenate along the band axis.
MultiBandImage stack_bands(const MultiBandImage& a, const MultiBandImage& b);

// Raster container: JSON header at `header_path`, payload at the same stem with ".bin".
std::filesystem::path payload_path(const std::filesystem::path& header_path);
void save_raster(const MultiBandImage& image, const std::filesystem::path& header_path);
MultiBandImage load_raster(const std::filesystem::path& header_path);
struct RasterInfo {
  std::string image_id;
  std::size_t bands = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::optional<GeoTransform> geotransform;
};
// Header only; the payload is not touched.
RasterInfo load_raster_info(const std::filesystem::path& header_path);

}  // namespace fforge
