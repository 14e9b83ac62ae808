// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

// Slow, obviously-correct reference implementations used as test oracles.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "geometry.hpp"
#include "rng.hpp"

namespace fforge::testing {

inline BinaryMask random_mask(Rng& rng, std::size_t h, std::size_t w, double density) {
  BinaryMask m(h, w);
  for (auto& b : m.bits()) b = rng.uniform() < density ? 1 : 0;
  return m;
}

// Blobs instead of salt noise: a few random filled rectangles.
inline BinaryMask random_blob_mask(Rng& rng, std::size_t h, std::size_t w, std::size_t blobs) {
  BinaryMask m(h, w);
  for (std::size_t k = 0; k < blobs; ++k) {
    const std::size_t r0 = rng.below(h), c0 = rng.below(w);
    const std::size_t r1 = std::min(h, r0 + 1 + rng.below(std::max<std::size_t>(1, h / 2)));
    const std::size_t c1 = std::min(w, c0 + 1 + rng.below(std::max<std::size_t>(1, w / 2)));
    for (std::size_t r = r0; r < r1; ++r) {
      for (std::size_t c = c0; c < c1; ++c) m.set(r, c);
    }
  }
  return m;
}

// Squared distance from every pixel to the nearest pixel whose value is `target`, by
// exhaustive search; +inf when no such pixel exists.
inline std::vector<double> brute_squared_distance(const BinaryMask& m, bool target) {
  const std::size_t h = m.height(), w = m.width();
  std::vector<double> out(h * w, std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t rr = 0; rr < h; ++rr) {
        for (std::size_t cc = 0; cc < w; ++cc) {
          if (m.get(rr, cc) != target) continue;
          const double dr = double(r) - double(rr), dc = double(c) - double(cc);
          best = std::min(best, dr * dr + dc * dc);
        }
      }
      out[r * w + c] = best;
    }
  }
  return out;
}

// Positive inside (distance to background), negative outside; +-(H+W) when the other class is absent.
inline std::vector<double> brute_signed_distance(const BinaryMask& m) {
  const auto to_bg = brute_squared_distance(m, false);
  const auto to_fg = brute_squared_distance(m, true);
  const double cap = double(m.height() + m.width());
  std::vector<double> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.bits()[i]) {
      out[i] = std::isinf(to_bg[i]) ? cap : std::sqrt(to_bg[i]);
    } else {
      out[i] = std::isinf(to_fg[i]) ? -cap : -std::sqrt(to_fg[i]);
    }
  }
  return out;
}

// Crossing-number test over every ring.
inline bool inside_even_odd(const Polygon& p, double x, double y) {
  bool in = false;
  auto ring = [&](const Ring& r) {
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
      const Point& a = r[i];
      const Point& b = r[j];
      if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
  };
  ring(p.exterior);
  for (const auto& hole : p.holes) ring(hole);
  return in;
}

inline BinaryMask brute_rasterize(const std::vector<Polygon>& polys, std::size_t h, std::size_t w) {
  BinaryMask m(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      for (const auto& p : polys) {
        if (inside_even_odd(p, double(c) + 0.5, double(r) + 0.5)) {
          m.set(r, c);
          break;
        }
      }
    }
  }
  return m;
}

// Largest number of disjoint (pred, truth) pairs with IoU >= thr, by exhaustive search.
// `iou` is pred-major (M x N).
inline std::size_t optimal_tp(const std::vector<double>& iou, std::size_t m, std::size_t n, double thr) {
  std::vector<bool> used(n, false);
  std::function<std::size_t(std::size_t)> best = [&](std::size_t i) -> std::size_t {
    if (i == m) return 0;
    std::size_t b = best(i + 1);  // pred i unmatched
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] || iou[i * n + j] < thr) continue;
      used[j] = true;
      b = std::max(b, 1 + best(i + 1));
      used[j] = false;
    }
    return b;
  };
  return best(0);
}

// Sorting-based linear-interpolation percentile.
inline double sorted_percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double rank = p / 100.0 * double(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  return v[lo] + (rank - double(lo)) * (v[hi] - v[lo]);
}

inline Polygon rect(double x0, double y0, double x1, double y1) {
  return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}, {}};
}

// Axis-aligned rectangle with integer corners inside an h x w image.
inline Polygon random_rect(Rng& rng, std::size_t h, std::size_t w, std::size_t max_side) {
  const auto sw = 1 + rng.below(max_side), sh = 1 + rng.below(max_side);
  const auto x0 = rng.below(w > sw ? w - sw + 1 : 1), y0 = rng.below(h > sh ? h - sh + 1 : 1);
  return rect(double(x0), double(y0), double(x0 + sw), double(y0 + sh));
}

// Star-shaped simple polygon with arbitrary double coordinates.
inline Polygon random_star(Rng& rng, double cx, double cy, double radius, std::size_t vertices) {
  Ring r;
  for (std::size_t k = 0; k < vertices; ++k) {
    const double a = 2.0 * M_PI * (double(k) + rng.uniform(0.0, 0.8)) / double(vertices);
    const double rad = radius * rng.uniform(0.3, 1.0);
    r.push_back({cx + rad * std::cos(a), cy + rad * std::sin(a)});
  }
  r.push_back(r.front());
  return {r, {}};
}

}  // namespace fforge::testing
