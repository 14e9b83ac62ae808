// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "error.hpp"
#include "json.hpp"
#include "labeling.hpp"
#include "nn/checkpoint.hpp"
#include "tiling.hpp"

namespace fforge::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

namespace {

const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> d{
      {"general.jobs", "1"},
      {"synth.seed", "0"},
      {"synth.n", "20"},
      {"synth.size", "650"},
      {"synth.bands", "8"},
      {"synth.density", "0.12"},
      {"synth.min_building", "10"},
      {"synth.max_building", "28"},
      {"synth.gap", "3"},
      {"synth.layer_keep", "0.8"},
      {"synth.city", "synth"},
      {"split.seed", "0"},
      {"label.tau", "3"},
      {"tile.input_size", "256"},
      {"tile.size", "256"},
      {"train.epochs", "300"},
      {"train.batch", "64"},
      {"train.depth", "3"},
      {"train.base", "8"},
      {"train.seed", "0"},
      {"adam.lr", "0.001"},
      {"adam.beta1", "0.9"},
      {"adam.beta2", "0.999"},
      {"adam.eps", "1e-8"},
      {"polygonize.threshold", "0.5"},
      {"polygonize.min_area", "0"},
  };
  return d;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config::Config() {
  for (const auto& [k, v] : defaults()) {
    values_[k] = v;
    overridden_[k] = false;
  }
}

std::vector<std::string> Config::keys() {
  std::vector<std::string> out;
  for (const auto& kv : defaults()) out.push_back(kv.first);
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + key + "'");
  it->second = trim(value);
  overridden_[key] = true;
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + key + "'");
  return it->second;
}

bool Config::is_default(const std::string& key) const {
  get(key);
  return !overridden_.at(key);
}

double Config::get_double(const std::string& key) const {
  const std::string& s = get(key);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ValidationError("config key '" + key + "': '" + s + "' is not a finite number");
  }
  return v;
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const std::string& s = get(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("config key '" + key + "': '" + s + "' is not a non-negative integer");
  }
  return v;
}

void Config::load_ini(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("cannot open config " + path.string());
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  for (const auto& [section, tree] : pt) {
    if (tree.empty()) {
      set("general." + section, tree.data());
      continue;
    }
    for (const auto& [key, leaf] : tree) {
      if (!leaf.empty()) throw ValidationError("config " + path.string() + ": nested key under [" + section + "]");
      set(section + "." + key, leaf.data());
    }
  }
}

SynthOptions synth_options(const Config& cfg) {
  SynthOptions o;
  o.seed = cfg.get_u64("synth.seed");
  o.n_images = cfg.get_size("synth.n");
  o.size = cfg.get_size("synth.size");
  o.bands = cfg.get_size("synth.bands");
  o.building_density = cfg.get_double("synth.density");
  o.min_building = cfg.get_size("synth.min_building");
  o.max_building = cfg.get_size("synth.max_building");
  o.gap = cfg.get_size("synth.gap");
  o.layer_keep = cfg.get_double("synth.layer_keep");
  o.city = cfg.get("synth.city");
  return o;
}

nn::UNetConfig network_config(const Config& cfg, std::size_t in_channels) {
  nn::UNetConfig c;
  c.in_channels = in_channels;
  c.depth = cfg.get_size("train.depth");
  c.base_channels = cfg.get_size("train.base");
  c.validate();
  return c;
}

nn::TrainOptions train_options(const Config& cfg) {
  nn::TrainOptions o;
  o.epochs = cfg.get_size("train.epochs");
  o.batch = cfg.get_size("train.batch");
  if (o.batch == 0) throw ValidationError("train.batch must be >= 1");
  o.seed = cfg.get_u64("train.seed");
  o.adam.lr = cfg.get_double("adam.lr");
  o.adam.beta1 = cfg.get_double("adam.beta1");
  o.adam.beta2 = cfg.get_double("adam.beta2");
  o.adam.eps = cfg.get_double("adam.eps");
  if (!(o.adam.lr > 0.0)) throw ValidationError("adam.lr must be > 0");
  if (!(o.adam.beta1 >= 0.0 && o.adam.beta1 < 1.0 && o.adam.beta2 >= 0.0 && o.adam.beta2 < 1.0)) {
    throw ValidationError("adam betas must lie in [0, 1)");
  }
  if (!(o.adam.eps > 0.0)) throw ValidationError("adam.eps must be > 0");
  o.threshold = cfg.get_double("polygonize.threshold");
  o.min_area = cfg.get_double("polygonize.min_area");
  return o;
}

// ---------------------------------------------------------------------------
// Helpers

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

namespace {

std::size_t jobs_of(const Config& cfg) { return std::max<std::uint64_t>(1, cfg.get_u64("general.jobs")); }

json read_json(const fs::path& path, const char* what) {
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

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

json stats_to_json(const std::vector<BandStats>& st) {
  json a = json::array();
  for (const auto& s : st) {
    a.push_back({{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}, {"lo", s.lo}, {"hi", s.hi}});
  }
  return a;
}

std::vector<BandStats> stats_from_json(const json& a) {
  std::vector<BandStats> out;
  for (const auto& s : a) {
    out.push_back({s.at("mean").get<double>(), s.at("std").get<double>(), s.at("min").get<double>(),
                   s.at("max").get<double>(), s.at("lo").get<double>(), s.at("hi").get<double>()});
  }
  return out;
}

MultiBandImage normalize(MultiBandImage im, const std::vector<BandStats>& st, const char* what) {
  if (st.size() != im.bands()) {
    throw ValidationError(std::string(what) + " raster '" + im.image_id() + "' has " + std::to_string(im.bands()) +
                          " bands but statistics cover " + std::to_string(st.size()));
  }
  for (std::size_t b = 0; b < im.bands(); ++b) {
    im = clip_channel(im, b, st[b].lo, st[b].hi);
    im = minmax_normalize(im, b);
  }
  return im;
}

// Footprint CSVs are usually shared by every entry; parse each file once.
std::map<std::string, std::vector<Polygon>> truth_by_image(const Manifest& m) {
  std::map<fs::path, FootprintTable> tables;
  std::map<std::string, std::vector<Polygon>> out;
  for (const auto& e : m.entries) {
    auto it = tables.find(e.footprints);
    if (it == tables.end()) it = tables.emplace(e.footprints, read_summary_csv(e.footprints)).first;
    auto rec = it->second.find(e.image_id);
    if (rec == it->second.end()) {
      throw ValidationError("no footprint rows for image '" + e.image_id + "' in " + e.footprints.string());
    }
    out[e.image_id] = polygons_of(rec->second);
  }
  return out;
}

std::vector<std::string> subset_ids(const Manifest& m, const fs::path& split_path, const std::string& subset) {
  if (split_path.empty() || subset == "all") {
    std::vector<std::string> ids;
    for (const auto& e : m.entries) ids.push_back(e.image_id);
    return ids;
  }
  const DatasetSplit s = load_split(split_path);
  return s.subset(subset);
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(ids.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) out += (i ? ", " : "") + ids[i];
  if (ids.size() > shown) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

std::vector<std::string> ids_with_suffix(const fs::path& dir, const std::string& suffix) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::string> ids;
  for (const auto& de : fs::directory_iterator(dir)) {
    const std::string name = de.path().filename().string();
    if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      ids.push_back(name.substr(0, name.size() - suffix.size()));
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Tiled variants index their samples by position in the 3x3 grid.
std::string sample_name(const std::string& id, bool tiled, std::size_t k) {
  return tiled ? id + "_t" + std::to_string(k) : id;
}

struct PreparedData {
  VariantId variant = VariantId::kV1;
  std::size_t in_channels = 0;
  std::size_t input_size = 0;
  std::size_t tile = 0;
  struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t samples = 0;
  };
  std::map<std::string, Image> images;
};

PreparedData load_prepared(const fs::path& dir) {
  const json j = read_json(dir / "variant.json", "prepared data index");
  PreparedData d;
  try {
    d.variant = parse_variant(j.at("variant").get<std::string>());
    d.in_channels = j.at("in_channels").get<std::size_t>();
    d.input_size = j.at("input_size").get<std::size_t>();
    d.tile = j.at("tile").get<std::size_t>();
    for (const auto& [id, v] : j.at("images").items()) {
      d.images[id] = {v.at("height").get<std::size_t>(), v.at("width").get<std::size_t>(),
                      v.at("samples").get<std::size_t>()};
    }
  } catch (const json::exception& e) {
    throw ValidationError("prepared data index in " + dir.string() + ": " + e.what());
  }
  return d;
}

const PreparedData::Image& prepared_image(const PreparedData& d, const std::string& id) {
  auto it = d.images.find(id);
  if (it == d.images.end()) throw ValidationError("image '" + id + "' has no prepared samples");
  return it->second;
}

std::vector<nn::TrainSample> load_samples(const fs::path& dir, const PreparedData& d,
                                          const std::vector<std::string>& ids) {
  std::vector<nn::TrainSample> out;
  const bool tiled = d.variant != VariantId::kV1;
  for (const auto& id : ids) {
    const auto& im = prepared_image(d, id);
    for (std::size_t k = 0; k < im.samples; ++k) {
      const std::string name = sample_name(id, tiled, k);
      out.push_back({load_raster(dir / ("x_" + name + ".json")), load_raster(dir / ("y_" + name + ".json"))});
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stages

Manifest run_synth(const Config& cfg, const fs::path& out_dir) { return synth_dataset(synth_options(cfg), out_dir); }

DatasetSplit run_split(const Config& cfg, const fs::path& manifest, const fs::path& out) {
  const DatasetSplit s = split(load_manifest(manifest), cfg.get_u64("split.seed"));
  save_split(s, out);
  return s;
}

void run_stats(const Config&, const fs::path& manifest, const fs::path& split_path, const fs::path& out) {
  const Manifest m = load_manifest(manifest);
  std::vector<std::string> ids = subset_ids(m, split_path, "train");
  if (ids.empty()) throw ValidationError("stats: no training images");
  std::vector<MultiBandImage> rgb, mul;
  for (const auto& id : ids) {
    const auto& e = m.entry(id);
    rgb.push_back(load_raster(e.rgb));
    mul.push_back(load_raster(e.mul));
  }
  auto all_stats = [](const std::vector<MultiBandImage>& ims, const char* what) {
    for (const auto& im : ims) {
      if (im.bands() != ims.front().bands()) throw ValidationError(std::string(what) + " rasters differ in band count");
    }
    std::vector<BandStats> st;
    for (std::size_t b = 0; b < ims.front().bands(); ++b) st.push_back(channel_stats(ims, b));
    return st;
  };
  json j;
  j["images"] = ids;
  j["rgb"] = stats_to_json(all_stats(rgb, "RGB"));
  j["mul"] = stats_to_json(all_stats(mul, "multispectral"));
  write_text(out, j.dump(2) + "\n");
}

void run_preprocess(const Config& cfg, const fs::path& manifest, const fs::path& stats_path, const fs::path& out_dir) {
  const Manifest m = load_manifest(manifest);
  const json j = read_json(stats_path, "statistics");
  std::vector<BandStats> rgb_st, mul_st;
  try {
    rgb_st = stats_from_json(j.at("rgb"));
    mul_st = stats_from_json(j.at("mul"));
  } catch (const json::exception& e) {
    throw ValidationError("statistics " + stats_path.string() + ": " + e.what());
  }
  fs::create_directories(out_dir);
  parallel_for(m.entries.size(), jobs_of(cfg), [&](std::size_t i) {
    const auto& e = m.entries[i];
    MultiBandImage rgb = normalize(load_raster(e.rgb), rgb_st, "RGB");
    MultiBandImage mul = normalize(load_raster(e.mul), mul_st, "multispectral");
    if (e.geotransform) {
      rgb.set_geotransform(e.geotransform);
      mul.set_geotransform(e.geotransform);
    }
    rgb.set_image_id(e.image_id);
    mul.set_image_id(e.image_id);
    save_raster(rgb, out_dir / (e.image_id + "_rgb.json"));
    save_raster(mul, out_dir / (e.image_id + "_mul.json"));
  });
}

void run_label(const Config& cfg, const fs::path& manifest, const fs::path& out_dir) {
  const Manifest m = load_manifest(manifest);
  const double tau = cfg.get_double("label.tau");
  if (!(tau > 0.0)) throw ValidationError("label.tau must be > 0");
  const auto truth = truth_by_image(m);
  fs::create_directories(out_dir);
  parallel_for(m.entries.size(), jobs_of(cfg), [&](std::size_t i) {
    const auto& e = m.entries[i];
    const RasterInfo info = load_raster_info(e.mul);
    MultiBandImage label = build_label(truth.at(e.image_id), info.height, info.width, tau).to_raster(e.image_id);
    label.set_geotransform(e.geotransform ? e.geotransform : info.geotransform);
    save_raster(label, out_dir / (e.image_id + "_label.json"));
  });
}

void run_tile(const Config& cfg, VariantId vid, const fs::path& manifest, const fs::path& pre_dir,
              const fs::path& label_dir, const fs::path& split_path, const fs::path& out_dir) {
  const Manifest m = load_manifest(manifest);
  const std::size_t input_size = cfg.get_size("tile.input_size");
  const std::size_t tile = cfg.get_size("tile.size");
  if (input_size == 0 || tile == 0) throw ValidationError("tile.input_size and tile.size must be >= 1");
  const ModelVariant variant = make_variant(vid);

  std::map<fs::path, GeoLayer> layers;
  if (vid == VariantId::kV3) {
    for (const auto& e : m.entries) {
      if (!e.buildings || !e.roads) throw ValidationError("v3 needs map layers for image '" + e.image_id + "'");
      for (const auto& p : {*e.buildings, *e.roads}) {
        if (!layers.count(p)) layers.emplace(p, load_geojson(p.string()));
      }
    }
  }

  // Model inputs and labels for one image, before centering.
  auto assemble = [&](const ManifestEntry& e) {
    const MultiBandImage mul = load_raster(pre_dir / (e.image_id + "_mul.json"));
    const MultiBandImage label = load_raster(label_dir / (e.image_id + "_label.json"));
    if (label.height() != mul.height() || label.width() != mul.width()) {
      throw ValidationError("label of '" + e.image_id + "' does not match its multispectral raster");
    }
    std::pair<std::vector<MultiBandImage>, std::vector<MultiBandImage>> xy;
    switch (vid) {
      case VariantId::kV1: {
        const MultiBandImage rgb = load_raster(pre_dir / (e.image_id + "_rgb.json"));
        xy.first.push_back(assemble_v1(rgb, mul, input_size));
        xy.second.push_back(resize(label, input_size, input_size, ResizeMethod::kBilinear));
        break;
      }
      case VariantId::kV2:
        xy.first = assemble_v2(mul, tile);
        xy.second = std::move(slice(label, tile).tiles);
        break;
      case VariantId::kV3:
        xy.first = assemble_v3(mul, layers.at(*e.buildings), layers.at(*e.roads), tile);
        xy.second = std::move(slice(label, tile).tiles);
        break;
    }
    return xy;
  };

  // Mean over every training sample (all tile positions pooled).
  const auto train_ids = subset_ids(m, split_path, "train");
  if (train_ids.empty()) throw ValidationError("tile: no training images for the mean image");
  std::vector<double> sum;
  std::size_t count = 0;
  std::size_t bands = 0, side_h = 0, side_w = 0;
  for (const auto& id : train_ids) {
    for (const auto& x : assemble(m.entry(id)).first) {
      if (sum.empty()) {
        sum.assign(x.samples().size(), 0.0);
        bands = x.bands();
        side_h = x.height();
        side_w = x.width();
      }
      if (x.samples().size() != sum.size()) throw ValidationError("tile: samples differ in shape");
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += x.samples()[k];
      ++count;
    }
  }
  std::vector<float> mean_values(sum.size());
  for (std::size_t k = 0; k < sum.size(); ++k) mean_values[k] = static_cast<float>(sum[k] / double(count));
  const MultiBandImage mean("mean", bands, side_h, side_w, std::move(mean_values));
  fs::create_directories(out_dir);
  save_raster(mean, out_dir / "mean.json");

  std::vector<PreparedData::Image> info(m.entries.size());
  parallel_for(m.entries.size(), jobs_of(cfg), [&](std::size_t i) {
    const auto& e = m.entries[i];
    auto [xs, ys] = assemble(e);
    const RasterInfo parent = load_raster_info(pre_dir / (e.image_id + "_mul.json"));
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const std::string name = sample_name(e.image_id, variant.tiled, k);
      MultiBandImage x = center(xs[k], mean);
      x.set_image_id(name);
      ys[k].set_image_id(name);
      save_raster(x, out_dir / ("x_" + name + ".json"));
      save_raster(ys[k], out_dir / ("y_" + name + ".json"));
    }
    info[i] = {parent.height, parent.width, xs.size()};
  });

  json j;
  j["variant"] = variant_name(vid);
  j["in_channels"] = variant.in_channels;
  j["input_size"] = input_size;
  j["tile"] = tile;
  j["images"] = json::object();
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    j["images"][m.entries[i].image_id] = {
        {"height", info[i].height}, {"width", info[i].width}, {"samples", info[i].samples}};
  }
  write_text(out_dir / "variant.json", j.dump(2) + "\n");
}

nn::TrainResult run_train(const Config& cfg, const fs::path& data_dir, const fs::path& split_path,
                          const fs::path& checkpoint, std::ostream* log, std::optional<VariantId> expected) {
  if (split_path.empty()) throw ValidationError("train needs a split file");
  const PreparedData d = load_prepared(data_dir);
  if (expected && *expected != d.variant) {
    throw ValidationError("data in " + data_dir.string() + " was prepared for " + variant_name(d.variant) + ", not " +
                          variant_name(*expected));
  }
  const DatasetSplit s = load_split(split_path);
  const auto train_set = load_samples(data_dir, d, s.train);
  const auto val_set = load_samples(data_dir, d, s.val);
  const nn::UNetConfig net_cfg = network_config(cfg, d.in_channels);
  nn::TrainOptions opt = train_options(cfg);
  if (log) {
    opt.on_epoch = [&](const nn::EpochStats& st) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "epoch %zu/%zu loss %.4f jaccard %.4f val_jaccard %.4f val_f1 %.4f\n", st.epoch,
                    opt.epochs, st.train_loss, st.train_jaccard, st.val_jaccard, st.val_f1);
      *log << buf << std::flush;
    };
  }
  nn::TrainResult result = nn::train(net_cfg, train_set, val_set, opt);

  nn::Checkpoint ckpt;
  ckpt.config = result.config;
  ckpt.adam = opt.adam;
  ckpt.params = result.params;
  ckpt.meta = {{"variant", variant_name(d.variant)},
               {"input_size", std::to_string(d.input_size)},
               {"tile", std::to_string(d.tile)},
               {"epochs", std::to_string(opt.epochs)},
               {"best_epoch", std::to_string(result.best_epoch)}};
  nn::save_checkpoint(ckpt, checkpoint);

  std::string hist = "epoch,train_loss,train_jaccard,val_jaccard,val_f1\n";
  for (const auto& st : result.history) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f\n", st.epoch, st.train_loss, st.train_jaccard,
                  st.val_jaccard, st.val_f1);
    hist += buf;
  }
  fs::path hist_path = checkpoint;
  hist_path.replace_extension(".history.csv");
  write_text(hist_path, hist);
  return result;
}

void run_predict(const Config& cfg, const fs::path& data_dir, const fs::path& checkpoint, const fs::path& split_path,
                 const std::string& subset, const fs::path& out_dir) {
  const PreparedData d = load_prepared(data_dir);
  const nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint);
  if (ckpt.config.in_channels != d.in_channels) {
    throw ValidationError("checkpoint expects " + std::to_string(ckpt.config.in_channels) +
                          " input channels, prepared data has " + std::to_string(d.in_channels));
  }
  if (auto it = ckpt.meta.find("variant"); it != ckpt.meta.end() && it->second != variant_name(d.variant)) {
    throw ValidationError("checkpoint was trained on " + it->second + " inputs, data is " + variant_name(d.variant));
  }
  std::vector<std::string> ids;
  if (split_path.empty() || subset == "all") {
    for (const auto& kv : d.images) ids.push_back(kv.first);
  } else {
    ids = load_split(split_path).subset(subset);
  }
  const bool tiled = d.variant != VariantId::kV1;
  fs::create_directories(out_dir);
  parallel_for(ids.size(), jobs_of(cfg), [&](std::size_t i) {
    const std::string& id = ids[i];
    const auto& im = prepared_image(d, id);
    nn::UNet<float> net(ckpt.config);
    net.set_params(ckpt.params);
    std::vector<MultiBandImage> probs;
    for (std::size_t k = 0; k < im.samples; ++k) {
      probs.push_back(nn::predict(net, load_raster(data_dir / ("x_" + sample_name(id, tiled, k) + ".json"))));
    }
    MultiBandImage out;
    if (tiled) {
      TileSet ts;
      ts.parent_h = im.height;
      ts.parent_w = im.width;
      ts.tile = d.tile;
      ts.row_offsets = tile_offsets(im.height, d.tile);
      ts.col_offsets = tile_offsets(im.width, d.tile);
      ts.tiles = std::move(probs);
      out = reassemble(ts);
    } else {
      out = resize(probs.front(), im.height, im.width, ResizeMethod::kBilinear);
    }
    out.set_image_id(id);
    out.set_geotransform(std::nullopt);
    save_raster(out, out_dir / (id + "_pred.json"));
  });
}

void run_ensemble(const Config& cfg, const std::vector<fs::path>& pred_dirs, const fs::path& out_dir) {
  if (pred_dirs.empty()) throw ValidationError("ensemble needs at least one prediction directory");
  const auto ids = ids_with_suffix(pred_dirs.front(), "_pred.json");
  for (std::size_t k = 1; k < pred_dirs.size(); ++k) {
    const auto other = ids_with_suffix(pred_dirs[k], "_pred.json");
    if (other != ids) {
      std::vector<std::string> diff;
      std::set_symmetric_difference(ids.begin(), ids.end(), other.begin(), other.end(), std::back_inserter(diff));
      throw ValidationError("prediction sets differ between " + pred_dirs.front().string() + " and " +
                            pred_dirs[k].string() + ": " + join_ids(diff));
    }
  }
  fs::create_directories(out_dir);
  parallel_for(ids.size(), jobs_of(cfg), [&](std::size_t i) {
    std::vector<MultiBandImage> preds;
    for (const auto& dir : pred_dirs) preds.push_back(load_raster(dir / (ids[i] + "_pred.json")));
    MultiBandImage out = combine(preds);
    out.set_image_id(ids[i]);
    save_raster(out, out_dir / (ids[i] + "_pred.json"));
  });
}

void run_polygonize(const Config& cfg, const fs::path& pred_dir, const fs::path& out_csv) {
  const double threshold = cfg.get_double("polygonize.threshold");
  const double min_area = cfg.get_double("polygonize.min_area");
  const auto ids = ids_with_suffix(pred_dir, "_pred.json");
  std::vector<ImageFootprints> out(ids.size());
  parallel_for(ids.size(), jobs_of(cfg), [&](std::size_t i) {
    out[i] = {ids[i], footprints_from_prediction(load_raster(pred_dir / (ids[i] + "_pred.json")), threshold, min_area)};
  });
  write_predictions_csv(out, out_csv);
}

ScoreRow run_score(const Config& cfg, const fs::path& manifest, const fs::path& pred_csv, const fs::path& split_path,
                   const std::string& subset, const std::string& city, const fs::path& out_csv) {
  const Manifest m = load_manifest(manifest);
  auto ids = subset_ids(m, split_path, subset);
  std::sort(ids.begin(), ids.end());
  const auto truth = truth_by_image(m);
  const FootprintTable preds = read_summary_csv(pred_csv, ZeroAreaPolicy::kDrop);

  std::vector<std::string> missing, extra;
  for (const auto& id : ids) {
    if (!preds.count(id)) missing.push_back(id);
  }
  const std::set<std::string> wanted(ids.begin(), ids.end());
  for (const auto& kv : preds) {
    if (!wanted.count(kv.first)) extra.push_back(kv.first);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "image ids of predictions and ground truth differ";
    if (!missing.empty()) msg += "; no predictions for: " + join_ids(missing);
    if (!extra.empty()) msg += "; unexpected predictions for: " + join_ids(extra);
    throw ValidationError(msg);
  }

  std::vector<MatchReport> reports(ids.size());
  parallel_for(ids.size(), jobs_of(cfg), [&](std::size_t i) {
    const RasterInfo info = load_raster_info(m.entry(ids[i]).mul);
    reports[i] = match_polygons(polygons_of(preds.at(ids[i])), truth.at(ids[i]), info.height, info.width);
  });
  const ScoreRow row =
      score_report(reports, city.empty() ? m.city : city, cfg.get_double("polygonize.min_area"));
  if (!out_csv.empty()) write_text(out_csv, score_csv(std::span<const ScoreRow>(&row, 1)));
  return row;
}

}  // namespace fforge::pipeline
