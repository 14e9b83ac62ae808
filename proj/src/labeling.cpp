// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "labeling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace fforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D lower envelope of parabolas (Felzenszwalb & Huttenlocher); f may hold +inf.
void envelope_1d(const double* f, std::size_t n, double* out, std::vector<std::size_t>& v,
                 std::vector<double>& z) {
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (!any) {
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      any = true;
      continue;
    }
    const auto dq = static_cast<double>(q);
    double s = 0.0;
    while (true) {
      const auto dv = static_cast<double>(v[k]);
      s = ((f[q] + dq * dq) - (f[v[k]] + dv * dv)) / (2.0 * dq - 2.0 * dv);
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everywhere.
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (!any) {
    std::fill(out, out + n, kInf);
    return;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const auto dq = static_cast<double>(q);
    while (z[k + 1] < dq) ++k;
    const double d = dq - static_cast<double>(v[k]);
    out[q] = d * d + f[v[k]];
  }
}

}  // namespace

std::vector<double> squared_distance_to(const BinaryMask& mask, bool target) {
  const std::size_t h = mask.height(), w = mask.width();
  std::vector<double> grid(h * w);
  for (std::size_t i = 0; i < h * w; ++i) grid[i] = (mask.bits()[i] != 0) == target ? 0.0 : kInf;

  std::vector<std::size_t> v;
  std::vector<double> z;
  std::vector<double> in(std::max(h, w)), out(std::max(h, w));
  for (std::size_t r = 0; r < h; ++r) {
    std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(r * w), w, in.begin());
    envelope_1d(in.data(), w, out.data(), v, z);
    std::copy_n(out.begin(), w, grid.begin() + static_cast<std::ptrdiff_t>(r * w));
  }
  for (std::size_t c = 0; c < w; ++c) {
    for (std::size_t r = 0; r < h; ++r) in[r] = grid[r * w + c];
    envelope_1d(in.data(), h, out.data(), v, z);
    for (std::size_t r = 0; r < h; ++r) grid[r * w + c] = out[r];
  }
  return grid;
}

DistanceField signed_distance(const BinaryMask& mask) {
  const std::size_t h = mask.height(), w = mask.width();
  DistanceField d{h, w, std::vector<double>(h * w)};
  const double cap = static_cast<double>(h + w);
  const auto to_bg = squared_distance_to(mask, false);
  const auto to_fg = squared_distance_to(mask, true);
  for (std::size_t i = 0; i < h * w; ++i) {
    if (mask.bits()[i]) {
      d.values[i] = to_bg[i] == kInf ? cap : std::sqrt(to_bg[i]);
    } else {
      d.values[i] = to_fg[i] == kInf ? -cap : -std::sqrt(to_fg[i]);
    }
  }
  return d;
}

LabelImage encode_label(const DistanceField& distance, double tau) {
  if (!(tau > 0.0)) throw ValidationError("encode_label: tau must be > 0");
  LabelImage label{distance.height, distance.width, tau, std::vector<float>(distance.values.size())};
  for (std::size_t i = 0; i < distance.values.size(); ++i) {
    const double s = std::clamp(distance.values[i] / tau, -1.0, 1.0);
    label.values[i] = static_cast<float>((s + 1.0) * 0.5);
  }
  return label;
}

LabelImage build_label(const std::vector<Polygon>& footprints, std::size_t height, std::size_t width,
                       double tau) {
  return encode_label(signed_distance(rasterize(footprints, height, width)), tau);
}

MultiBandImage LabelImage::to_raster(std::string image_id) const {
  return MultiBandImage(std::move(image_id), 1, height, width, values);
}

BinaryMask threshold_mask(std::span<const float> values, std::size_t height, std::size_t width,
                          double threshold) {
  if (values.size() != height * width) throw ValidationError("threshold_mask: size mismatch");
  BinaryMask m(height, width);
  for (std::size_t i = 0; i < values.size(); ++i) m.bits()[i] = values[i] > threshold ? 1 : 0;
  return m;
}

}  // namespace fforge
