// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "geometry.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "error.hpp"
#include "json.hpp"

namespace fforge {

std::size_t BinaryMask::popcount() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

double ring_signed_area(const Ring& ring) {
  if (ring.size() < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    acc += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
  }
  // Tolerate rings that are not explicitly closed.
  if (!(ring.front() == ring.back())) {
    acc += ring.back().x * ring.front().y - ring.front().x * ring.back().y;
  }
  return 0.5 * acc;
}

double polygon_area(const Polygon& polygon) {
  double a = std::abs(ring_signed_area(polygon.exterior));
  for (const auto& h : polygon.holes) a -= std::abs(ring_signed_area(h));
  return a;
}

// ---------------------------------------------------------------------------
// WKT

namespace {

class WktReader {
 public:
  explicit WktReader(std::string_view text) : text_(text) {}

  std::optional<Polygon> parse() {
    skip_ws();
    expect_keyword("POLYGON");
    skip_ws();
    if (match_keyword("EMPTY")) {
      finish();
      return std::nullopt;
    }
    Polygon poly;
    expect('(');
    poly.exterior = parse_ring();
    skip_ws();
    while (match(',')) {
      poly.holes.push_back(parse_ring());
      skip_ws();
    }
    expect(')');
    finish();
    return poly;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("WKT parse error at byte " + std::to_string(pos_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool match(char ch) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char ch) {
    if (!match(ch)) fail(std::string("expected '") + ch + "'");
  }

  bool match_keyword(std::string_view kw) {
    skip_ws();
    if (text_.size() - pos_ < kw.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i) {
      if (std::toupper(static_cast<unsigned char>(text_[pos_ + i])) != kw[i]) return false;
    }
    const std::size_t end = pos_ + kw.size();
    if (end < text_.size() && std::isalnum(static_cast<unsigned char>(text_[end]))) return false;
    pos_ = end;
    return true;
  }

  void expect_keyword(std::string_view kw) {
    if (!match_keyword(kw)) fail("expected keyword " + std::string(kw));
  }

  double number() {
    skip_ws();
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    // from_chars rejects a leading '+'.
    if (first != last && *first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) fail("expected a number");
    if (!std::isfinite(v)) fail("non-finite coordinate");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return v;
  }

  Ring parse_ring() {
    const std::size_t ring_start = pos_;
    expect('(');
    Ring ring;
    do {
      Point p;
      p.x = number();
      p.y = number();
      ring.push_back(p);
      skip_ws();
    } while (match(','));
    expect(')');
    if (ring.size() < 4) {
      pos_ = ring_start;
      fail("ring has " + std::to_string(ring.size()) + " points, need at least 4");
    }
    if (!(ring.front() == ring.back())) {
      pos_ = ring_start;
      fail("ring not closed (first point != last point)");
    }
    return ring;
  }

  void finish() {
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void append_number(std::string& out, double v) {
  std::array<char, 64> buf{};
  if (v == 0.0) v = 0.0;  // drop negative zero
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

void append_ring(std::string& out, const Ring& ring) {
  out += '(';
  for (std::size_t i = 0; i < ring.size(); ++i) {
    if (i) out += ", ";
    append_number(out, ring[i].x);
    out += ' ';
    append_number(out, ring[i].y);
  }
  out += ')';
}

}  // namespace

std::optional<Polygon> parse_wkt(std::string_view text) { return WktReader(text).parse(); }

std::string to_wkt(const Polygon& polygon) {
  std::string out = "POLYGON (";
  append_ring(out, polygon.exterior);
  for (const auto& h : polygon.holes) {
    out += ", ";
    append_ring(out, h);
  }
  out += ')';
  return out;
}

// ---------------------------------------------------------------------------
// Rasterization

namespace {

// Calls emit(row, col_begin, col_end) for every covered half-open span.
template <typename Emit>
void scan_polygon(const Polygon& polygon, std::size_t height, std::size_t width, Emit&& emit) {
  if (polygon.exterior.empty() || height == 0 || width == 0) return;
  double min_y = polygon.exterior.front().y;
  double max_y = min_y;
  for (const auto& p : polygon.exterior) {
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double h = static_cast<double>(height);
  const auto r0 = static_cast<std::ptrdiff_t>(std::max(0.0, std::floor(min_y - 0.5)));
  const auto r1 = static_cast<std::ptrdiff_t>(std::min(h - 1.0, std::ceil(max_y)));
  std::vector<double> xs;
  auto scan_ring = [&](const Ring& ring, double y) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = ring[i];
      const Point& b = ring[(i + 1) % n];
      if ((a.y <= y) != (b.y <= y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
    }
  };
  for (std::ptrdiff_t r = r0; r <= r1; ++r) {
    const double y = static_cast<double>(r) + 0.5;
    xs.clear();
    scan_ring(polygon.exterior, y);
    for (const auto& hole : polygon.holes) scan_ring(hole, y);
    if (xs.size() < 2) continue;
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Centers c+0.5 in [xa, xb).
      const double c_begin = std::ceil(xs[k] - 0.5);
      const double c_end = std::ceil(xs[k + 1] - 0.5);
      const double lo = std::max(0.0, c_begin);
      const double hi = std::min(static_cast<double>(width), c_end);
      if (hi > lo) {
        emit(static_cast<std::size_t>(r), static_cast<std::size_t>(lo), static_cast<std::size_t>(hi));
      }
    }
  }
}

}  // namespace

void rasterize_into(const Polygon& polygon, BinaryMask& mask) {
  auto& bits = mask.bits();
  const std::size_t w = mask.width();
  scan_polygon(polygon, mask.height(), w, [&](std::size_t r, std::size_t c0, std::size_t c1) {
    std::fill(bits.begin() + static_cast<std::ptrdiff_t>(r * w + c0),
              bits.begin() + static_cast<std::ptrdiff_t>(r * w + c1), std::uint8_t{1});
  });
}

BinaryMask rasterize(const std::vector<Polygon>& polygons, std::size_t height, std::size_t width) {
  BinaryMask mask(height, width);
  for (const auto& p : polygons) rasterize_into(p, mask);
  return mask;
}

void rasterize_stroke(const LineString& line, double width, BinaryMask& mask) {
  if (line.empty() || mask.size() == 0) return;
  const double half = 0.5 * width;
  const double h2 = half * half;
  auto segment = [&](const Point& a, const Point& b) {
    const double x0 = std::min(a.x, b.x) - half, x1 = std::max(a.x, b.x) + half;
    const double y0 = std::min(a.y, b.y) - half, y1 = std::max(a.y, b.y) + half;
    const auto c_lo = static_cast<std::ptrdiff_t>(std::max(0.0, std::floor(x0 - 0.5)));
    const auto c_hi = static_cast<std::ptrdiff_t>(
        std::min(static_cast<double>(mask.width()) - 1.0, std::ceil(x1)));
    const auto r_lo = static_cast<std::ptrdiff_t>(std::max(0.0, std::floor(y0 - 0.5)));
    const auto r_hi = static_cast<std::ptrdiff_t>(
        std::min(static_cast<double>(mask.height()) - 1.0, std::ceil(y1)));
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    for (std::ptrdiff_t r = r_lo; r <= r_hi; ++r) {
      for (std::ptrdiff_t c = c_lo; c <= c_hi; ++c) {
        const double px = static_cast<double>(c) + 0.5, py = static_cast<double>(r) + 0.5;
        double t = len2 > 0.0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double ex = a.x + t * dx - px, ey = a.y + t * dy - py;
        if (ex * ex + ey * ey <= h2) mask.set(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
      }
    }
  };
  if (line.size() == 1) {
    segment(line[0], line[0]);
    return;
  }
  for (std::size_t i = 0; i + 1 < line.size(); ++i) segment(line[i], line[i + 1]);
}

// ---------------------------------------------------------------------------
// Boundary tracing

namespace {

// Directions in image axes (y down), clockwise order: east, south, west, north.
constexpr std::array<int, 4> kDx{1, 0, -1, 0};
constexpr std::array<int, 4> kDy{0, 1, 0, -1};

struct Edge {
  std::uint32_t from;
  std::uint32_t to;
  std::uint8_t dir;
};

// 8-connected component labels (-1 background), in raster scan order of first pixel.
std::vector<std::int32_t> label_components(const BinaryMask& mask, std::int32_t& count) {
  const std::size_t h = mask.height(), w = mask.width();
  std::vector<std::int32_t> labels(h * w, -1);
  std::vector<std::size_t> stack;
  count = 0;
  for (std::size_t start = 0; start < h * w; ++start) {
    if (!mask.bits()[start] || labels[start] >= 0) continue;
    labels[start] = count;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const auto r = static_cast<std::ptrdiff_t>(p / w), c = static_cast<std::ptrdiff_t>(p % w);
      for (std::ptrdiff_t dr = -1; dr <= 1; ++dr) {
        for (std::ptrdiff_t dc = -1; dc <= 1; ++dc) {
          const auto rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(h) || cc >= static_cast<std::ptrdiff_t>(w)) continue;
          const auto q = static_cast<std::size_t>(rr) * w + static_cast<std::size_t>(cc);
          if (mask.bits()[q] && labels[q] < 0) {
            labels[q] = count;
            stack.push_back(q);
          }
        }
      }
    }
    ++count;
  }
  return labels;
}

}  // namespace

std::vector<Polygon> extract_polygons(const BinaryMask& mask) {
  const std::size_t h = mask.height(), w = mask.width();
  std::int32_t n_comp = 0;
  const auto labels = label_components(mask, n_comp);
  if (n_comp == 0) return {};

  const std::size_t vw = w + 1;
  auto vid = [vw](std::size_t x, std::size_t y) { return static_cast<std::uint32_t>(y * vw + x); };
  auto fg = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    return r >= 0 && c >= 0 && r < static_cast<std::ptrdiff_t>(h) && c < static_cast<std::ptrdiff_t>(w) &&
           mask.bits()[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c)];
  };

  // Directed boundary edges, foreground on the right-hand side when walking in image axes.
  std::vector<Edge> edges;
  std::vector<std::int32_t> edge_comp;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (!mask.bits()[r * w + c]) continue;
      const auto rr = static_cast<std::ptrdiff_t>(r), cc = static_cast<std::ptrdiff_t>(c);
      const std::int32_t comp = labels[r * w + c];
      if (!fg(rr - 1, cc)) edges.push_back({vid(c, r), vid(c + 1, r), 0});
      if (!fg(rr, cc + 1)) edges.push_back({vid(c + 1, r), vid(c + 1, r + 1), 1});
      if (!fg(rr + 1, cc)) edges.push_back({vid(c + 1, r + 1), vid(c, r + 1), 2});
      if (!fg(rr, cc - 1)) edges.push_back({vid(c, r + 1), vid(c, r), 3});
      while (edge_comp.size() < edges.size()) edge_comp.push_back(comp);
    }
  }

  // At most two edges leave any lattice vertex.
  const std::size_t n_vert = (h + 1) * vw;
  std::vector<std::array<std::int32_t, 2>> out(n_vert, {-1, -1});
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto& slot = out[edges[i].from];
    (slot[0] < 0 ? slot[0] : slot[1]) = static_cast<std::int32_t>(i);
  }

  std::vector<std::uint8_t> used(edges.size(), 0);
  std::vector<Polygon> polys(static_cast<std::size_t>(n_comp));
  std::vector<std::vector<Ring>> negative(static_cast<std::size_t>(n_comp));

  for (std::size_t start = 0; start < edges.size(); ++start) {
    if (used[start]) continue;
    std::vector<std::uint32_t> verts;
    std::vector<std::uint8_t> dirs;
    std::size_t e = start;
    while (!used[e]) {
      used[e] = 1;
      verts.push_back(edges[e].from);
      dirs.push_back(edges[e].dir);
      const auto& cand = out[edges[e].to];
      // Prefer a left turn, then straight, then right: keeps diagonal neighbours in one ring.
      const int d = edges[e].dir;
      const std::array<int, 3> pref{(d + 3) % 4, d, (d + 1) % 4};
      std::int32_t next = -1;
      for (int want : pref) {
        for (std::int32_t k : cand) {
          if (k >= 0 && !used[static_cast<std::size_t>(k)] && edges[static_cast<std::size_t>(k)].dir == want) {
            next = k;
            break;
          }
        }
        if (next >= 0) break;
      }
      if (next < 0) break;
      e = static_cast<std::size_t>(next);
    }
    // Keep only corners.
    Ring ring;
    const std::size_t n = verts.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (dirs[i] == dirs[(i + n - 1) % n]) continue;
      ring.push_back({static_cast<double>(verts[i] % vw), static_cast<double>(verts[i] / vw)});
    }
    if (ring.empty()) continue;
    ring.push_back(ring.front());
    const auto comp = static_cast<std::size_t>(edge_comp[start]);
    if (ring_signed_area(ring) > 0.0) {
      polys[comp].exterior = std::move(ring);
    } else {
      negative[comp].push_back(std::move(ring));
    }
  }
  for (std::size_t k = 0; k < polys.size(); ++k) polys[k].holes = std::move(negative[k]);
  return polys;
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<Polygon> merge_intersecting(const std::vector<Polygon>& polygons, std::size_t height,
                                        std::size_t width) {
  const std::size_t n = polygons.size();
  DisjointSets sets(n);
  std::vector<std::int32_t> owner(height * width, -1);
  for (std::size_t i = 0; i < n; ++i) {
    scan_polygon(polygons[i], height, width, [&](std::size_t r, std::size_t c0, std::size_t c1) {
      for (std::size_t c = c0; c < c1; ++c) {
        auto& o = owner[r * width + c];
        if (o < 0) {
          o = static_cast<std::int32_t>(i);
        } else {
          sets.unite(static_cast<std::size_t>(o), i);
        }
      }
    });
  }

  // Per-group bounding boxes; groups are pixel-disjoint, so each is retraced on its own crop.
  struct Box {
    std::size_t r0 = SIZE_MAX, c0 = SIZE_MAX, r1 = 0, c1 = 0;
    bool any = false;
  };
  std::vector<Box> boxes(n);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const auto o = owner[r * width + c];
      if (o < 0) continue;
      auto& b = boxes[sets.find(static_cast<std::size_t>(o))];
      b.any = true;
      b.r0 = std::min(b.r0, r);
      b.c0 = std::min(b.c0, c);
      b.r1 = std::max(b.r1, r + 1);
      b.c1 = std::max(b.c1, c + 1);
    }
  }

  std::vector<Polygon> result;
  for (std::size_t g = 0; g < n; ++g) {
    if (sets.find(g) != g || !boxes[g].any) continue;
    const Box& b = boxes[g];
    BinaryMask crop(b.r1 - b.r0, b.c1 - b.c0);
    for (std::size_t r = b.r0; r < b.r1; ++r) {
      for (std::size_t c = b.c0; c < b.c1; ++c) {
        const auto o = owner[r * width + c];
        if (o >= 0 && sets.find(static_cast<std::size_t>(o)) == g) crop.set(r - b.r0, c - b.c0);
      }
    }
    for (auto& p : extract_polygons(crop)) {
      auto shift = [&](Ring& ring) {
        for (auto& pt : ring) {
          pt.x += static_cast<double>(b.c0);
          pt.y += static_cast<double>(b.r0);
        }
      };
      shift(p.exterior);
      for (auto& hole : p.holes) shift(hole);
      result.push_back(std::move(p));
    }
  }
  return result;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ValidationError("mask_iou: dimension mismatch");
  }
  std::size_t inter = 0, uni = 0;
  const auto& x = a.bits();
  const auto& y = b.bits();
  for (std::size_t i = 0; i < x.size(); ++i) {
    inter += (x[i] & y[i]);
    uni += (x[i] | y[i]);
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------
// Geo <-> pixel

Point pixel_to_geo(const GeoTransform& gt, double col, double row) {
  const auto& g = gt.c;
  return {g[0] + col * g[1] + row * g[2], g[3] + col * g[4] + row * g[5]};
}

Point geo_to_pixel(const GeoTransform& gt, double x_geo, double y_geo) {
  const auto& g = gt.c;
  const double det = gt.determinant();
  if (det == 0.0) throw ValidationError("geo_to_pixel: singular geotransform");
  const double dx = x_geo - g[0];
  const double dy = y_geo - g[3];
  return {(g[5] * dx - g[2] * dy) / det, (-g[4] * dx + g[1] * dy) / det};
}

Polygon polygon_to_pixel(const GeoTransform& gt, const Polygon& geo) {
  auto conv = [&](const Ring& ring) {
    Ring out;
    out.reserve(ring.size());
    for (const auto& p : ring) out.push_back(geo_to_pixel(gt, p.x, p.y));
    return out;
  };
  Polygon px;
  px.exterior = conv(geo.exterior);
  for (const auto& h : geo.holes) px.holes.push_back(conv(h));
  return px;
}

// ---------------------------------------------------------------------------
// GeoJSON

namespace {

Ring ring_from_json(const nlohmann::json& j) {
  Ring ring;
  for (const auto& pos : j) {
    if (!pos.is_array() || pos.size() < 2) throw ValidationError("GeoJSON: malformed position");
    ring.push_back({pos[0].get<double>(), pos[1].get<double>()});
  }
  return ring;
}

Polygon polygon_from_json(const nlohmann::json& rings) {
  if (!rings.is_array() || rings.empty()) throw ValidationError("GeoJSON: polygon without rings");
  Polygon p;
  p.exterior = ring_from_json(rings[0]);
  for (std::size_t i = 1; i < rings.size(); ++i) p.holes.push_back(ring_from_json(rings[i]));
  if (p.exterior.size() < 4 || !(p.exterior.front() == p.exterior.back())) {
    throw ValidationError("GeoJSON: polygon ring must be closed with >= 4 positions");
  }
  return p;
}

void collect_geometry(const nlohmann::json& g, GeoLayer& layer) {
  if (g.is_null()) return;
  const std::string type = g.at("type").get<std::string>();
  if (type == "Polygon") {
    layer.polygons.push_back(polygon_from_json(g.at("coordinates")));
  } else if (type == "MultiPolygon") {
    for (const auto& rings : g.at("coordinates")) layer.polygons.push_back(polygon_from_json(rings));
  } else if (type == "LineString") {
    layer.lines.push_back(ring_from_json(g.at("coordinates")));
  } else if (type == "MultiLineString") {
    for (const auto& l : g.at("coordinates")) layer.lines.push_back(ring_from_json(l));
  } else if (type == "GeometryCollection") {
    for (const auto& sub : g.at("geometries")) collect_geometry(sub, layer);
  }
  // Points carry no area or stroke and are ignored.
}

nlohmann::json ring_to_json(const Ring& ring) {
  auto a = nlohmann::json::array();
  for (const auto& p : ring) a.push_back({p.x, p.y});
  return a;
}

}  // namespace

GeoLayer parse_geojson(std::string_view text) {
  GeoLayer layer;
  try {
    const auto j = nlohmann::json::parse(text);
    const std::string type = j.at("type").get<std::string>();
    if (type == "FeatureCollection") {
      for (const auto& f : j.at("features")) collect_geometry(f.at("geometry"), layer);
    } else if (type == "Feature") {
      collect_geometry(j.at("geometry"), layer);
    } else {
      collect_geometry(j, layer);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("GeoJSON: ") + e.what());
  }
  return layer;
}

GeoLayer load_geojson(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open GeoJSON " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_geojson(ss.str());
}

std::string to_geojson(const GeoLayer& layer) {
  nlohmann::json fc;
  fc["type"] = "FeatureCollection";
  auto features = nlohmann::json::array();
  for (const auto& p : layer.polygons) {
    auto rings = nlohmann::json::array();
    rings.push_back(ring_to_json(p.exterior));
    for (const auto& h : p.holes) rings.push_back(ring_to_json(h));
    features.push_back({{"type", "Feature"},
                        {"properties", nlohmann::json::object()},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", rings}}}});
  }
  for (const auto& l : layer.lines) {
    features.push_back({{"type", "Feature"},
                        {"properties", nlohmann::json::object()},
                        {"geometry", {{"type", "LineString"}, {"coordinates", ring_to_json(l)}}}});
  }
  fc["features"] = features;
  return fc.dump();
}

}  // namespace fforge
