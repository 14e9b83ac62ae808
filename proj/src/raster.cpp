// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "error.hpp"
#include "json.hpp"

namespace fforge {

namespace {

void require_channel(const MultiBandImage& image, std::size_t channel) {
  if (channel >= image.bands()) {
    throw ValidationError("channel " + std::to_string(channel) + " out of range for image '" +
                          image.image_id() + "' with " + std::to_string(image.bands()) + " bands");
  }
}

template <typename T>
double percentile_impl(std::span<const T> values, double p) {
  if (values.empty()) throw ValidationError("percentile of empty sequence");
  if (!(p >= 0.0 && p <= 100.0)) throw ValidationError("percentile p must lie in [0,100]");
  std::vector<double> sorted(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(rank));
  const std::size_t above = std::min(below + 1, sorted.size() - 1);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(below), sorted.end());
  const double lower = sorted[below];
  if (above == below) return lower;
  // The next order statistic is the minimum of the upper partition.
  const double upper = *std::min_element(sorted.begin() + static_cast<std::ptrdiff_t>(below) + 1,
                                         sorted.end());
  return lower + (rank - static_cast<double>(below)) * (upper - lower);
}

}  // namespace

MultiBandImage::MultiBandImage(std::string image_id, std::size_t bands, std::size_t height,
                               std::size_t width, float fill)
    : image_id_(std::move(image_id)),
      bands_(bands),
      height_(height),
      width_(width),
      samples_(bands * height * width, fill) {}

MultiBandImage::MultiBandImage(std::string image_id, std::size_t bands, std::size_t height,
                               std::size_t width, std::vector<float> samples)
    : image_id_(std::move(image_id)),
      bands_(bands),
      height_(height),
      width_(width),
      samples_(std::move(samples)) {
  if (samples_.size() != bands * height * width) {
    throw ValidationError("raster '" + image_id_ + "': sample count " +
                          std::to_string(samples_.size()) + " != C*H*W = " +
                          std::to_string(bands * height * width));
  }
}

std::span<float> MultiBandImage::band(std::size_t b) {
  return std::span<float>(samples_).subspan(b * plane_size(), plane_size());
}

std::span<const float> MultiBandImage::band(std::size_t b) const {
  return std::span<const float>(samples_).subspan(b * plane_size(), plane_size());
}

void MultiBandImage::check_finite() const {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw ValidationError("raster '" + image_id_ + "' has a non-finite sample at index " +
                            std::to_string(i));
    }
  }
}

double percentile(std::span<const double> values, double p) { return percentile_impl(values, p); }
double percentile(std::span<const float> values, double p) { return percentile_impl(values, p); }

BandStats channel_stats(std::span<const MultiBandImage> images, std::size_t channel) {
  if (images.empty()) throw ValidationError("channel_stats: empty image set");
  const std::size_t bands = images.front().bands();
  std::size_t total = 0;
  for (const auto& im : images) {
    if (im.bands() != bands) throw ValidationError("channel_stats: images disagree on band count");
    require_channel(im, channel);
    total += im.plane_size();
  }
  if (total == 0) throw ValidationError("channel_stats: no pixels");

  std::vector<float> pooled;
  pooled.reserve(total);
  for (const auto& im : images) {
    auto b = im.band(channel);
    pooled.insert(pooled.end(), b.begin(), b.end());
  }

  // Two-pass for the variance to stay accurate on large pools.
  double sum = 0.0;
  for (float v : pooled) sum += v;
  const double mean = sum / static_cast<double>(total);
  double ss = 0.0;
  for (float v : pooled) ss += (v - mean) * (v - mean);

  BandStats s;
  s.mean = mean;
  s.std = std::sqrt(ss / static_cast<double>(total));
  auto [mn, mx] = std::minmax_element(pooled.begin(), pooled.end());
  s.min = *mn;
  s.max = *mx;
  s.lo = percentile(std::span<const float>(pooled), kLowPercentile);
  s.hi = percentile(std::span<const float>(pooled), kHighPercentile);
  return s;
}

MultiBandImage clip_channel(const MultiBandImage& image, std::size_t channel, double lo, double hi) {
  require_channel(image, channel);
  if (lo > hi) throw ValidationError("clip_channel: lo > hi");
  MultiBandImage out = image;
  const auto flo = static_cast<float>(lo);
  const auto fhi = static_cast<float>(hi);
  for (float& v : out.band(channel)) v = std::clamp(v, flo, fhi);
  return out;
}

MultiBandImage minmax_normalize(const MultiBandImage& image, std::size_t channel) {
  require_channel(image, channel);
  MultiBandImage out = image;
  auto band = out.band(channel);
  if (band.empty()) return out;
  auto [mn, mx] = std::minmax_element(band.begin(), band.end());
  const double lo = *mn;
  const double range = static_cast<double>(*mx) - lo;
  if (range <= 0.0) {
    std::fill(band.begin(), band.end(), 0.0f);
    return out;
  }
  for (float& v : band) v = static_cast<float>((v - lo) / range);
  return out;
}

MultiBandImage mean_image(std::span<const MultiBandImage> images) {
  if (images.empty()) throw ValidationError("mean_image: empty image set");
  const auto& first = images.front();
  std::vector<double> acc(first.samples().size(), 0.0);
  for (const auto& im : images) {
    if (!im.same_shape(first)) throw ValidationError("mean_image: shape mismatch at '" + im.image_id() + "'");
    const auto& s = im.samples();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s[i];
  }
  MultiBandImage out("mean", first.bands(), first.height(), first.width());
  const double n = static_cast<double>(images.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out.samples()[i] = static_cast<float>(acc[i] / n);
  return out;
}

MultiBandImage center(const MultiBandImage& image, const MultiBandImage& mean) {
  if (!image.same_shape(mean)) throw ValidationError("center: shape mismatch for '" + image.image_id() + "'");
  MultiBandImage out = image;
  auto& s = out.samples();
  const auto& m = mean.samples();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] -= m[i];
  return out;
}

MultiBandImage resize(const MultiBandImage& image, std::size_t out_h, std::size_t out_w,
                      ResizeMethod method) {
  if (out_h == 0 || out_w == 0) throw ValidationError("resize: zero target size");
  const std::size_t in_h = image.height();
  const std::size_t in_w = image.width();
  if (in_h == 0 || in_w == 0) throw ValidationError("resize: empty source raster");
  MultiBandImage out(image.image_id(), image.bands(), out_h, out_w);
  if (auto gt = image.geotransform()) {
    // Keep the geographic footprint: scale pixel size by the resize factors.
    const double sy = static_cast<double>(in_h) / static_cast<double>(out_h);
    const double sx = static_cast<double>(in_w) / static_cast<double>(out_w);
    GeoTransform g = *gt;
    g.c[1] *= sx;
    g.c[4] *= sx;
    g.c[2] *= sy;
    g.c[5] *= sy;
    out.set_geotransform(g);
  }
  if (in_h == out_h && in_w == out_w) {
    out.samples() = image.samples();
    return out;
  }
  const double sy = static_cast<double>(in_h) / static_cast<double>(out_h);
  const double sx = static_cast<double>(in_w) / static_cast<double>(out_w);

  if (method == ResizeMethod::kNearest) {
    std::vector<std::size_t> rows(out_h), cols(out_w);
    for (std::size_t r = 0; r < out_h; ++r)
      rows[r] = std::min(in_h - 1, static_cast<std::size_t>(std::floor((r + 0.5) * sy)));
    for (std::size_t c = 0; c < out_w; ++c)
      cols[c] = std::min(in_w - 1, static_cast<std::size_t>(std::floor((c + 0.5) * sx)));
    for (std::size_t b = 0; b < image.bands(); ++b)
      for (std::size_t r = 0; r < out_h; ++r)
        for (std::size_t c = 0; c < out_w; ++c) out.at(b, r, c) = image.at(b, rows[r], cols[c]);
    return out;
  }

  // Pixel-center alignment, edge-clamped taps.
  struct Tap {
    std::size_t i0, i1;
    double t;
  };
  auto taps = [](std::size_t n_out, std::size_t n_in, double scale) {
    std::vector<Tap> v(n_out);
    const double max_pos = static_cast<double>(n_in - 1);
    for (std::size_t i = 0; i < n_out; ++i) {
      const double pos = std::clamp((i + 0.5) * scale - 0.5, 0.0, max_pos);
      const auto i0 = static_cast<std::size_t>(std::floor(pos));
      const std::size_t i1 = std::min(i0 + 1, n_in - 1);
      v[i] = {i0, i1, pos - static_cast<double>(i0)};
    }
    return v;
  };
  const auto ry = taps(out_h, in_h, sy);
  const auto rx = taps(out_w, in_w, sx);
  for (std::size_t b = 0; b < image.bands(); ++b) {
    for (std::size_t r = 0; r < out_h; ++r) {
      const auto& ty = ry[r];
      for (std::size_t c = 0; c < out_w; ++c) {
        const auto& tx = rx[c];
        const double v00 = image.at(b, ty.i0, tx.i0);
        const double v01 = image.at(b, ty.i0, tx.i1);
        const double v10 = image.at(b, ty.i1, tx.i0);
        const double v11 = image.at(b, ty.i1, tx.i1);
        const double top = v00 + tx.t * (v01 - v00);
        const double bottom = v10 + tx.t * (v11 - v10);
        out.at(b, r, c) = static_cast<float>(top + ty.t * (bottom - top));
      }
    }
  }
  return out;
}

MultiBandImage select_bands(const MultiBandImage& image, std::span<const std::size_t> bands) {
  MultiBandImage out(image.image_id(), bands.size(), image.height(), image.width());
  out.set_geotransform(image.geotransform());
  for (std::size_t i = 0; i < bands.size(); ++i) {
    require_channel(image, bands[i]);
    auto src = image.band(bands[i]);
    std::copy(src.begin(), src.end(), out.band(i).begin());
  }
  return out;
}

MultiBandImage stack_bands(const MultiBandImage& a, const MultiBandImage& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ValidationError("stack_bands: spatial size mismatch for '" + a.image_id() + "'");
  }
  std::vector<float> s = a.samples();
  s.insert(s.end(), b.samples().begin(), b.samples().end());
  MultiBandImage out(a.image_id(), a.bands() + b.bands(), a.height(), a.width(), std::move(s));
  out.set_geotransform(a.geotransform() ? a.geotransform() : b.geotransform());
  return out;
}

std::filesystem::path payload_path(const std::filesystem::path& header_path) {
  auto p = header_path;
  p.replace_extension(".bin");
  return p;
}

void save_raster(const MultiBandImage& image, const std::filesystem::path& header_path) {
  nlohmann::json h;
  h["image_id"] = image.image_id();
  h["bands"] = image.bands();
  h["height"] = image.height();
  h["width"] = image.width();
  h["dtype"] = "f32le";
  if (auto gt = image.geotransform()) {
    h["geotransform"] = gt->c;
  } else {
    h["geotransform"] = nullptr;
  }
  if (header_path.has_parent_path()) std::filesystem::create_directories(header_path.parent_path());
  {
    std::ofstream f(header_path);
    if (!f) throw IoError("cannot write raster header " + header_path.string());
    f << h.dump(2) << '\n';
    if (!f) throw IoError("write failed for " + header_path.string());
  }
  std::ofstream bin(payload_path(header_path), std::ios::binary);
  if (!bin) throw IoError("cannot write raster payload " + payload_path(header_path).string());
  const auto& s = image.samples();
  if constexpr (std::endian::native == std::endian::little) {
    bin.write(reinterpret_cast<const char*>(s.data()),
              static_cast<std::streamsize>(s.size() * sizeof(float)));
  } else {
    for (float v : s) {
      auto u = std::bit_cast<std::uint32_t>(v);
      unsigned char bytes[4] = {static_cast<unsigned char>(u), static_cast<unsigned char>(u >> 8),
                                static_cast<unsigned char>(u >> 16),
                                static_cast<unsigned char>(u >> 24)};
      bin.write(reinterpret_cast<const char*>(bytes), 4);
    }
  }
  if (!bin) throw IoError("write failed for " + payload_path(header_path).string());
}

RasterInfo load_raster_info(const std::filesystem::path& header_path) {
  std::ifstream f(header_path);
  if (!f) throw IoError("cannot open raster header " + header_path.string());
  RasterInfo info;
  try {
    nlohmann::json h;
    f >> h;
    if (h.at("dtype").get<std::string>() != "f32le") {
      throw ValidationError("unsupported dtype in " + header_path.string());
    }
    info.image_id = h.at("image_id").get<std::string>();
    info.bands = h.at("bands").get<std::size_t>();
    info.height = h.at("height").get<std::size_t>();
    info.width = h.at("width").get<std::size_t>();
    if (h.contains("geotransform") && !h["geotransform"].is_null()) {
      GeoTransform g;
      g.c = h["geotransform"].get<std::array<double, 6>>();
      info.geotransform = g;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("raster header " + header_path.string() + ": " + e.what());
  }
  if (info.bands == 0) {
    throw ValidationError("raster header " + header_path.string() + ": bands must be >= 1");
  }
  return info;
}

MultiBandImage load_raster(const std::filesystem::path& header_path) {
  const RasterInfo info = load_raster_info(header_path);
  const std::size_t n = info.bands * info.height * info.width;
  std::ifstream bin(payload_path(header_path), std::ios::binary);
  if (!bin) throw IoError("cannot open raster payload " + payload_path(header_path).string());
  std::vector<unsigned char> raw(n * 4);
  bin.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(bin.gcount()) != raw.size()) {
    throw ValidationError("raster payload " + payload_path(header_path).string() +
                          " is shorter than C*H*W*4 bytes");
  }
  std::vector<float> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t u = std::uint32_t(raw[4 * i]) | (std::uint32_t(raw[4 * i + 1]) << 8) |
                            (std::uint32_t(raw[4 * i + 2]) << 16) |
                            (std::uint32_t(raw[4 * i + 3]) << 24);
    s[i] = std::bit_cast<float>(u);
  }
  MultiBandImage im(info.image_id, info.bands, info.height, info.width, std::move(s));
  if (info.geotransform) {
    if (!info.geotransform->invertible()) {
      throw ValidationError("raster '" + info.image_id + "' has a singular geotransform");
    }
    im.set_geotransform(info.geotransform);
  }
  im.check_finite();
  return im;
}

}  // namespace fforge
