// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ensemble.hpp"
#include "error.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace fforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const fs::path& path, const char* what) {
  std::ifstream f(path);
  if (!f) throw IoError(std::string("cannot open ") + what + " " + path.string());
  try {
    json j;
    f >> j;
    return j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + " " + path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() ? q : (base / q).lexically_normal();
}

fs::path existing(const fs::path& p, const std::string& image_id) {
  if (!fs::exists(p)) throw IoError("manifest entry '" + image_id + "' references missing file " + p.string());
  return p;
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  if (base.empty()) return p.generic_string();
  const fs::path rel = p.lexically_relative(base);
  return rel.empty() ? p.generic_string() : rel.generic_string();
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest

const ManifestEntry& Manifest::entry(const std::string& image_id) const {
  for (const auto& e : entries) {
    if (e.image_id == image_id) return e;
  }
  throw ValidationError("image id '" + image_id + "' is not in the manifest");
}

Manifest load_manifest(const fs::path& path) {
  const json j = read_json_file(path, "manifest");
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  Manifest m;
  std::set<std::string> seen;
  try {
    m.city = j.value("city", std::string("unknown"));
    for (const auto& e : j.at("images")) {
      ManifestEntry me;
      me.image_id = e.at("image_id").get<std::string>();
      if (me.image_id.empty()) throw ValidationError("manifest entry with an empty image_id");
      if (!seen.insert(me.image_id).second) throw ValidationError("duplicate image id '" + me.image_id + "'");
      me.rgb = existing(resolve(base, e.at("rgb").get<std::string>()), me.image_id);
      me.mul = existing(resolve(base, e.at("mul").get<std::string>()), me.image_id);
      me.footprints = existing(resolve(base, e.at("footprints").get<std::string>()), me.image_id);
      if (e.contains("buildings") && !e["buildings"].is_null()) {
        me.buildings = existing(resolve(base, e["buildings"].get<std::string>()), me.image_id);
      }
      if (e.contains("roads") && !e["roads"].is_null()) {
        me.roads = existing(resolve(base, e["roads"].get<std::string>()), me.image_id);
      }
      if (e.contains("geotransform") && !e["geotransform"].is_null()) {
        GeoTransform gt;
        gt.c = e["geotransform"].get<std::array<double, 6>>();
        if (!gt.invertible()) throw ValidationError("manifest entry '" + me.image_id + "' has a singular geotransform");
        me.geotransform = gt;
      }
      m.entries.push_back(std::move(me));
    }
  } catch (const json::exception& e) {
    throw ValidationError("manifest " + path.string() + ": " + e.what());
  }
  if (m.entries.empty()) throw ValidationError("manifest " + path.string() + " lists no images");
  return m;
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path();
  json images = json::array();
  for (const auto& e : manifest.entries) {
    json je;
    je["image_id"] = e.image_id;
    je["rgb"] = relative_to(e.rgb, base);
    je["mul"] = relative_to(e.mul, base);
    je["footprints"] = relative_to(e.footprints, base);
    if (e.buildings) je["buildings"] = relative_to(*e.buildings, base);
    if (e.roads) je["roads"] = relative_to(*e.roads, base);
    je["geotransform"] = e.geotransform ? json(e.geotransform->c) : json(nullptr);
    images.push_back(std::move(je));
  }
  json j;
  j["city"] = manifest.city;
  j["images"] = std::move(images);
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Split

const std::vector<std::string>& DatasetSplit::subset(const std::string& name) const {
  if (name == "train") return train;
  if (name == "val") return val;
  if (name == "test") return test;
  throw ValidationError("unknown subset '" + name + "' (expected train, val or test)");
}

std::size_t split_test_count(std::size_t n) { return (2 * n + 5) / 10; }
std::size_t split_val_count(std::size_t remaining) { return (3 * remaining + 5) / 10; }

DatasetSplit split(const Manifest& manifest, std::uint64_t seed) {
  const std::size_t n = manifest.entries.size();
  if (n < 3) throw ValidationError("split needs at least 3 images, got " + std::to_string(n));
  std::vector<std::string> ids;
  ids.reserve(n);
  for (const auto& e : manifest.entries) ids.push_back(e.image_id);
  Rng rng(seed);
  rng.shuffle(ids);
  const std::size_t n_test = split_test_count(n);
  const std::size_t n_val = split_val_count(n - n_test);
  DatasetSplit s;
  s.seed = seed;
  s.test.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.val.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_test),
               ids.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  s.train.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), ids.end());
  return s;
}

void save_split(const DatasetSplit& s, const fs::path& path) {
  json j;
  j["seed"] = s.seed;
  j["train"] = s.train;
  j["val"] = s.val;
  j["test"] = s.test;
  write_text_file(path, j.dump(2) + "\n");
}

DatasetSplit load_split(const fs::path& path) {
  const json j = read_json_file(path, "split");
  DatasetSplit s;
  try {
    s.seed = j.value("seed", std::uint64_t{0});
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ValidationError("split " + path.string() + ": " + e.what());
  }
  std::set<std::string> all;
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    for (const auto& id : *part) {
      if (!all.insert(id).second) throw ValidationError("split " + path.string() + ": '" + id + "' listed twice");
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// summaryData CSV

namespace {

constexpr const char* kCsvHeader = "ImageId,BuildingId,PolygonWKT_Pix";

// RFC 4180 fields of one physical line; quotes may enclose commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  std::size_t i = 0;
  while (true) {
    field.clear();
    if (i < line.size() && line[i] == '"') {
      ++i;
      while (true) {
        if (i >= line.size()) throw ValidationError("line " + std::to_string(line_no) + ": unterminated quoted field");
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += line[i++];
      }
      if (i < line.size() && line[i] != ',') {
        throw ValidationError("line " + std::to_string(line_no) + ": unexpected character after quoted field");
      }
    } else {
      while (i < line.size() && line[i] != ',') field += line[i++];
    }
    out.push_back(field);
    if (i >= line.size()) break;
    ++i;  // comma
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  q += '"';
  return q;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t')) --b;
  return std::string(s.substr(a, b - a));
}

}  // namespace

FootprintTable parse_summary_csv(const std::string& text, ZeroAreaPolicy policy, std::vector<std::string>* warnings) {
  FootprintTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  int col_id = -1, col_bid = -1, col_wkt = -1;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line, line_no);
    if (!have_header) {
      for (std::size_t k = 0; k < fields.size(); ++k) {
        const std::string name = trim(fields[k]);
        if (name == "ImageId") col_id = static_cast<int>(k);
        if (name == "BuildingId") col_bid = static_cast<int>(k);
        if (name == "PolygonWKT_Pix") col_wkt = static_cast<int>(k);
      }
      if (col_id < 0 || col_bid < 0 || col_wkt < 0) {
        throw ValidationError("line " + std::to_string(line_no) + ": header must contain ImageId, BuildingId and " +
                              "PolygonWKT_Pix");
      }
      have_header = true;
      continue;
    }
    const std::size_t needed = static_cast<std::size_t>(std::max({col_id, col_bid, col_wkt})) + 1;
    if (fields.size() < needed) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected at least " + std::to_string(needed) +
                            " fields, got " + std::to_string(fields.size()));
    }
    FootprintRecord rec;
    rec.image_id = trim(fields[static_cast<std::size_t>(col_id)]);
    if (rec.image_id.empty()) throw ValidationError("line " + std::to_string(line_no) + ": empty ImageId");
    const std::string bid = trim(fields[static_cast<std::size_t>(col_bid)]);
    const auto [ptr, ec] = std::from_chars(bid.data(), bid.data() + bid.size(), rec.building_id);
    if (ec != std::errc() || ptr != bid.data() + bid.size()) {
      throw ValidationError("line " + std::to_string(line_no) + ": BuildingId '" + bid + "' is not an integer");
    }
    std::optional<Polygon> poly;
    try {
      poly = parse_wkt(fields[static_cast<std::size_t>(col_wkt)]);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    auto& list = table[rec.image_id];
    if (!poly) continue;  // POLYGON EMPTY: image present, no footprints
    if (polygon_area(*poly) <= 0.0) {
      if (policy == ZeroAreaPolicy::kDrop) continue;
      if (warnings) {
        warnings->push_back("line " + std::to_string(line_no) + ": zero-area polygon for image '" + rec.image_id +
                            "' kept");
      }
    }
    rec.polygon = std::move(*poly);
    list.push_back(std::move(rec));
  }
  if (!have_header) throw ValidationError("CSV has no header line");
  return table;
}

FootprintTable read_summary_csv(const fs::path& path, ZeroAreaPolicy policy, std::vector<std::string>* warnings) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open CSV " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  try {
    return parse_summary_csv(ss.str(), policy, warnings);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string format_summary_csv(const std::vector<ImageFootprints>& predictions) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& img : predictions) {
    const std::string id = csv_field(img.image_id);
    if (img.polygons.empty()) {
      out += id + ",-1," + std::string(kEmptyPolygonWkt) + "\n";
      continue;
    }
    for (std::size_t k = 0; k < img.polygons.size(); ++k) {
      out += id + "," + std::to_string(k + 1) + "," + csv_field(to_wkt(img.polygons[k])) + "\n";
    }
  }
  return out;
}

void write_predictions_csv(const std::vector<ImageFootprints>& predictions, const fs::path& path) {
  write_text_file(path, format_summary_csv(predictions));
}

std::vector<Polygon> polygons_of(const std::vector<FootprintRecord>& records) {
  std::vector<Polygon> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.polygon);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic scenes

namespace {

using Signature = std::array<double, 8>;

// Reflectance-like DN per multispectral band.
constexpr Signature kVegetation{250, 300, 420, 380, 300, 700, 900, 850};
constexpr Signature kSoil{350, 400, 480, 520, 560, 600, 620, 640};
constexpr Signature kAsphalt{300, 320, 340, 340, 340, 350, 360, 360};
constexpr std::array<Signature, 3> kRoofs{{
    {620, 680, 720, 740, 760, 720, 660, 650},  // concrete
    {380, 400, 440, 600, 820, 640, 600, 600},  // tile
    {520, 600, 640, 620, 600, 560, 520, 500},  // metal
}};
constexpr double kNoiseSigma = 20.0;
constexpr double kGlintRate = 5e-4;
constexpr double kRoadWidth = 5.0;

struct Rect {
  std::int64_t x0, y0, x1, y1;  // half-open pixel box
};

Polygon rect_polygon(double x0, double y0, double x1, double y1) {
  return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}, {}};
}

// Rectangle or L shape inside the box; the L drops one corner block.
Polygon building_shape(const Rect& b, Rng& rng) {
  const double x0 = double(b.x0), y0 = double(b.y0), x1 = double(b.x1), y1 = double(b.y1);
  const std::int64_t w = b.x1 - b.x0, h = b.y1 - b.y0;
  if (rng.uniform() >= 0.3 || w < 8 || h < 8) return rect_polygon(x0, y0, x1, y1);
  const double cw = double(rng.between(w / 3, w / 2));
  const double ch = double(rng.between(h / 3, h / 2));
  Ring r;
  switch (rng.below(4)) {
    case 0:  // top-right notch
      r = {{x0, y0}, {x1 - cw, y0}, {x1 - cw, y0 + ch}, {x1, y0 + ch}, {x1, y1}, {x0, y1}, {x0, y0}};
      break;
    case 1:  // bottom-right
      r = {{x0, y0}, {x1, y0}, {x1, y1 - ch}, {x1 - cw, y1 - ch}, {x1 - cw, y1}, {x0, y1}, {x0, y0}};
      break;
    case 2:  // bottom-left
      r = {{x0, y0}, {x1, y0}, {x1, y1}, {x0 + cw, y1}, {x0 + cw, y1 - ch}, {x0, y1 - ch}, {x0, y0}};
      break;
    default:  // top-left
      r = {{x0 + cw, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0 + ch}, {x0 + cw, y0 + ch}, {x0 + cw, y0}};
      break;
  }
  return {r, {}};
}

void validate(const SynthOptions& o) {
  if (o.n_images == 0) throw ValidationError("synth: n must be >= 1");
  if (o.bands != 8) throw ValidationError("synth: only 8-band multispectral scenes are supported");
  if (o.min_building < 3 || o.min_building > o.max_building) {
    throw ValidationError("synth: building size range must satisfy 3 <= min <= max");
  }
  if (o.size < o.max_building + 2 * o.gap + 1) {
    throw ValidationError("synth: size " + std::to_string(o.size) + " too small for buildings up to " +
                          std::to_string(o.max_building) + " px");
  }
  if (!(o.building_density > 0.0 && o.building_density <= 0.5)) {
    throw ValidationError("synth: building density must be in (0, 0.5]");
  }
  if (!(o.layer_keep >= 0.0 && o.layer_keep <= 1.0)) throw ValidationError("synth: layer_keep must be in [0, 1]");
  if (o.city.empty()) throw ValidationError("synth: city name is empty");
}

std::string synth_id(const SynthOptions& o, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_img%04zu", k + 1);
  return o.city + buf;
}

SynthImage make_scene(const SynthOptions& o, std::size_t k) {
  Rng rng(o.seed * 0x100000001b3ULL + 0x9e3779b97f4a7c15ULL * (k + 1));
  const std::size_t S = o.size;
  const double s = double(S);
  SynthImage img;
  img.image_id = synth_id(o, k);

  // Roads: one or two straight lines crossing the scene.
  const std::size_t n_roads = 1 + rng.below(2);
  BinaryMask road_mask(S, S), forbidden(S, S);
  for (std::size_t i = 0; i < n_roads; ++i) {
    const double a = rng.uniform(0.15, 0.85) * s;
    const double b = std::clamp(a + rng.uniform(-0.2, 0.2) * s, 0.1 * s, 0.9 * s);
    LineString line = rng.uniform() < 0.5 ? LineString{{0.0, a}, {s, b}} : LineString{{a, 0.0}, {b, s}};
    rasterize_stroke(line, kRoadWidth, road_mask);
    rasterize_stroke(line, kRoadWidth + 2.0 * double(o.gap), forbidden);
    img.roads.push_back(std::move(line));
  }

  // Buildings: rejection placement with clearance until the target area is reached.
  const double target = o.building_density * s * s;
  const double mean_side = 0.5 * double(o.min_building + o.max_building);
  const std::size_t max_attempts = 200 * (static_cast<std::size_t>(target / (mean_side * mean_side)) + 1);
  img.building_mask = BinaryMask(S, S);
  double covered = 0.0;
  const auto g = static_cast<std::int64_t>(o.gap);
  for (std::size_t attempt = 0; attempt < max_attempts && covered < target; ++attempt) {
    const auto w = rng.between(std::int64_t(o.min_building), std::int64_t(o.max_building));
    const auto h = rng.between(std::int64_t(o.min_building), std::int64_t(o.max_building));
    const auto x = rng.between(g, std::int64_t(S) - g - w);
    const auto y = rng.between(g, std::int64_t(S) - g - h);
    bool free = true;
    for (auto r = y; r < y + h && free; ++r) {
      for (auto c = x; c < x + w; ++c) {
        if (forbidden.get(std::size_t(r), std::size_t(c))) {
          free = false;
          break;
        }
      }
    }
    if (!free) continue;
    Polygon p = building_shape({x, y, x + w, y + h}, rng);
    covered += polygon_area(p);
    rasterize_into(p, img.building_mask);
    for (auto r = std::max<std::int64_t>(0, y - g); r < std::min<std::int64_t>(std::int64_t(S), y + h + g); ++r) {
      for (auto c = std::max<std::int64_t>(0, x - g); c < std::min<std::int64_t>(std::int64_t(S), x + w + g); ++c) {
        forbidden.set(std::size_t(r), std::size_t(c));
      }
    }
    img.buildings.push_back(std::move(p));
  }
  if (covered < target) {
    throw ValidationError("synth: could not place buildings at density " + std::to_string(o.building_density) +
                          " in " + std::to_string(S) + " px scenes");
  }

  // Per-building roof material and brightness, painted through an owner map.
  std::vector<std::int32_t> owner(S * S, -1);
  std::vector<std::pair<std::size_t, double>> material;
  for (std::size_t i = 0; i < img.buildings.size(); ++i) {
    BinaryMask m(S, S);
    rasterize_into(img.buildings[i], m);
    for (std::size_t p = 0; p < m.size(); ++p) {
      if (m.bits()[p]) owner[p] = static_cast<std::int32_t>(i);
    }
    material.emplace_back(rng.below(kRoofs.size()), rng.uniform(0.85, 1.15));
  }

  // Smooth vegetation/soil mixing field.
  std::array<double, 9> wave{};
  for (auto& v : wave) v = rng.uniform();
  img.mul = MultiBandImage(img.image_id + "_mul", 8, S, S);
  img.rgb = MultiBandImage(img.image_id + "_rgb", 3, S, S);
  for (std::size_t r = 0; r < S; ++r) {
    for (std::size_t c = 0; c < S; ++c) {
      const double u = double(c) / s, v = double(r) / s;
      double a = 0.0;
      for (std::size_t q = 0; q < 3; ++q) {
        const double fx = 1.0 + 2.0 * wave[3 * q], fy = 1.0 + 2.0 * wave[3 * q + 1];
        a += std::cos(2.0 * M_PI * (fx * u + fy * v + wave[3 * q + 2]));
      }
      a = std::clamp(0.5 + a / 6.0, 0.0, 1.0);
      const std::size_t p = r * S + c;
      const bool glint = rng.uniform() < kGlintRate;
      for (std::size_t b = 0; b < 8; ++b) {
        double val = 0.0;
        if (owner[p] >= 0) {
          const auto& [kind, bright] = material[std::size_t(owner[p])];
          val = kRoofs[kind][b] * bright;
        } else if (road_mask.bits()[p]) {
          val = kAsphalt[b];
        } else {
          val = a * kVegetation[b] + (1.0 - a) * kSoil[b];
        }
        val += kNoiseSigma * rng.normal();
        if (glint) val *= 2.5;
        img.mul.at(b, r, c) = static_cast<float>(std::max(0.0, val));
      }
      const std::array<std::size_t, 3> rgb_src{kRed, kGreen, kBlue};
      for (std::size_t b = 0; b < 3; ++b) {
        const double val = img.mul.at(rgb_src[b], r, c) + 0.5 * kNoiseSigma * rng.normal();
        img.rgb.at(b, r, c) = static_cast<float>(std::max(0.0, val));
      }
    }
  }

  GeoTransform gt;
  gt.c = {500000.0 + double(k) * (s + 100.0), 1.0, 0.0, 4000000.0, 0.0, -1.0};
  img.mul.set_geotransform(gt);
  img.rgb.set_geotransform(gt);
  return img;
}

}  // namespace

std::vector<SynthImage> synth_images(const SynthOptions& options) {
  validate(options);
  std::vector<SynthImage> out;
  out.reserve(options.n_images);
  for (std::size_t k = 0; k < options.n_images; ++k) out.push_back(make_scene(options, k));
  return out;
}

Manifest synth_dataset(const SynthOptions& options, const fs::path& out_dir) {
  validate(options);
  fs::create_directories(out_dir / "rasters");
  Manifest m;
  m.city = options.city;
  GeoLayer buildings_layer, roads_layer;
  std::vector<ImageFootprints> truth;
  Rng layer_rng(options.seed ^ 0x6a09e667f3bcc909ULL);
  const fs::path csv = out_dir / "summaryData.csv";
  const fs::path buildings_path = out_dir / "buildings.geojson";
  const fs::path roads_path = out_dir / "roads.geojson";

  // One scene at a time keeps memory flat for large n.
  for (std::size_t k = 0; k < options.n_images; ++k) {
    SynthImage img = make_scene(options, k);
    ManifestEntry e;
    e.image_id = img.image_id;
    e.rgb = out_dir / "rasters" / (img.image_id + "_rgb.json");
    e.mul = out_dir / "rasters" / (img.image_id + "_mul.json");
    e.footprints = csv;
    e.buildings = buildings_path;
    e.roads = roads_path;
    e.geotransform = img.mul.geotransform();
    save_raster(img.rgb, e.rgb);
    save_raster(img.mul, e.mul);

    const GeoTransform& gt = *e.geotransform;
    auto to_geo = [&](const Ring& ring) {
      Ring out;
      for (const auto& p : ring) out.push_back(pixel_to_geo(gt, p.x, p.y));
      return out;
    };
    for (const auto& b : img.buildings) {
      if (layer_rng.uniform() < options.layer_keep) buildings_layer.polygons.push_back({to_geo(b.exterior), {}});
    }
    for (const auto& r : img.roads) roads_layer.lines.push_back(to_geo(r));
    truth.push_back({img.image_id, std::move(img.buildings)});
    m.entries.push_back(std::move(e));
  }
  write_predictions_csv(truth, csv);
  write_text_file(buildings_path, to_geojson(buildings_layer) + "\n");
  write_text_file(roads_path, to_geojson(roads_layer) + "\n");
  save_manifest(m, out_dir / "manifest.json");
  return m;
}

}  // namespace fforge
