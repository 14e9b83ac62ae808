// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "fforge/fforge.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "dataset.hpp"
#include "ensemble.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "nn/checkpoint.hpp"
#include "nn/trainer.hpp"
#include "pipeline.hpp"

struct ff_config {
  fforge::pipeline::Config cfg;
};

struct ff_raster {
  fforge::MultiBandImage image;
};

struct ff_model {
  fforge::nn::Checkpoint ckpt;
  fforge::nn::UNet<float> net;
};

namespace {

#define FFORGE_STR2(x) #x
#define FFORGE_STR(x) FFORGE_STR2(x)

thread_local std::string g_last_error;
thread_local std::string g_format_buffer;

ff_status fail(ff_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <typename F>
ff_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return FF_OK;
  } catch (const fforge::Error& e) {
    return fail(e.kind() == fforge::Error::Kind::kIo ? FF_ERR_IO : FF_ERR_INVALID, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(FF_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(FF_ERR_NOMEM, "out of memory");
  } catch (const std::exception& e) {
    return fail(FF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FF_ERR_INTERNAL, "unknown error");
  }
}

std::string str(const char* s) { return s ? std::string(s) : std::string(); }

void require(const void* p, const char* what) {
  if (!p) throw fforge::ValidationError(std::string(what) + " must not be NULL");
}

const fforge::pipeline::Config& config_of(const ff_config* cfg) {
  static const fforge::pipeline::Config kDefaults;
  return cfg ? cfg->cfg : kDefaults;
}

ff_scores to_c(const fforge::Scores& s, std::size_t tp, std::size_t proposed, std::size_t ground_truth) {
  return {s.precision, s.recall, s.f1, s.min_area, tp, proposed, ground_truth, {}};
}

}  // namespace

extern "C" {

const char* ff_version(void) {
#ifdef FFORGE_VERSION
  return FFORGE_STR(FFORGE_VERSION);
#else
  return "0.0.0";
#endif
}

const char* ff_last_error(void) { return g_last_error.c_str(); }

ff_status ff_config_new(ff_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ff_config();
  });
}

void ff_config_free(ff_config* cfg) { delete cfg; }

ff_status ff_config_load(ff_config* cfg, const char* ini_path) {
  return guarded([&] {
    require(cfg, "cfg");
    require(ini_path, "ini_path");
    cfg->cfg.load_ini(ini_path);
  });
}

ff_status ff_config_set(ff_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    cfg->cfg.set(key, value);
  });
}

ff_status ff_config_get(const ff_config* cfg, const char* key, char* buf, size_t buf_len, size_t* needed) {
  return guarded([&] {
    require(key, "key");
    const std::string& v = config_of(cfg).get(key);
    if (needed) *needed = v.size() + 1;
    if (buf && buf_len > 0) {
      const std::size_t n = std::min(buf_len - 1, v.size());
      std::memcpy(buf, v.data(), n);
      buf[n] = '\0';
    }
  });
}

size_t ff_config_key_count(void) { return fforge::pipeline::Config::keys().size(); }

const char* ff_config_key(size_t i) {
  static const std::vector<std::string> keys = fforge::pipeline::Config::keys();
  return i < keys.size() ? keys[i].c_str() : nullptr;
}

ff_status ff_synth(const ff_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(out_dir, "out_dir");
    fforge::pipeline::run_synth(config_of(cfg), out_dir);
  });
}

ff_status ff_split(const ff_config* cfg, const char* manifest, const char* out_split) {
  return guarded([&] {
    require(manifest, "manifest");
    require(out_split, "out_split");
    fforge::pipeline::run_split(config_of(cfg), manifest, out_split);
  });
}

ff_status ff_stats(const ff_config* cfg, const char* manifest, const char* split, const char* out_stats) {
  return guarded([&] {
    require(manifest, "manifest");
    require(out_stats, "out_stats");
    fforge::pipeline::run_stats(config_of(cfg), manifest, str(split), out_stats);
  });
}

ff_status ff_preprocess(const ff_config* cfg, const char* manifest, const char* stats, const char* out_dir) {
  return guarded([&] {
    require(manifest, "manifest");
    require(stats, "stats");
    require(out_dir, "out_dir");
    fforge::pipeline::run_preprocess(config_of(cfg), manifest, stats, out_dir);
  });
}

ff_status ff_label(const ff_config* cfg, const char* manifest, const char* out_dir) {
  return guarded([&] {
    require(manifest, "manifest");
    require(out_dir, "out_dir");
    fforge::pipeline::run_label(config_of(cfg), manifest, out_dir);
  });
}

ff_status ff_tile(const ff_config* cfg, const char* variant, const char* manifest, const char* pre_dir,
                  const char* label_dir, const char* split, const char* out_dir) {
  return guarded([&] {
    require(variant, "variant");
    require(manifest, "manifest");
    require(pre_dir, "pre_dir");
    require(label_dir, "label_dir");
    require(out_dir, "out_dir");
    fforge::pipeline::run_tile(config_of(cfg), fforge::parse_variant(variant), manifest, pre_dir, label_dir,
                               str(split), out_dir);
  });
}

ff_status ff_train(const ff_config* cfg, const char* variant, const char* data_dir, const char* split,
                   const char* out_checkpoint, ff_log_fn log, void* user) {
  return guarded([&] {
    std::optional<fforge::VariantId> expected;
    if (variant) expected = fforge::parse_variant(variant);
    require(data_dir, "data_dir");
    require(split, "split");
    require(out_checkpoint, "out_checkpoint");
    if (!log) {
      fforge::pipeline::run_train(config_of(cfg), data_dir, split, out_checkpoint, nullptr, expected);
      return;
    }
    // Forward each completed line to the callback.
    struct LineBuf : std::stringbuf {
      ff_log_fn fn;
      void* user;
      LineBuf(ff_log_fn f, void* u) : fn(f), user(u) {}
      int sync() override {
        std::string s = str();
        std::size_t pos = 0;
        while (true) {
          const auto nl = s.find('\n', pos);
          if (nl == std::string::npos) break;
          fn(s.substr(pos, nl - pos).c_str(), user);
          pos = nl + 1;
        }
        str(s.substr(pos));
        return 0;
      }
    } buf(log, user);
    std::ostream os(&buf);
    fforge::pipeline::run_train(config_of(cfg), data_dir, split, out_checkpoint, &os, expected);
    os.flush();
  });
}

ff_status ff_predict(const ff_config* cfg, const char* data_dir, const char* checkpoint, const char* split,
                     const char* subset, const char* out_dir) {
  return guarded([&] {
    require(data_dir, "data_dir");
    require(checkpoint, "checkpoint");
    require(out_dir, "out_dir");
    fforge::pipeline::run_predict(config_of(cfg), data_dir, checkpoint, str(split),
                                  subset ? subset : "all", out_dir);
  });
}

ff_status ff_ensemble(const ff_config* cfg, const char* const* pred_dirs, size_t n_dirs, const char* out_dir) {
  return guarded([&] {
    require(pred_dirs, "pred_dirs");
    require(out_dir, "out_dir");
    std::vector<std::filesystem::path> dirs;
    for (size_t i = 0; i < n_dirs; ++i) {
      require(pred_dirs[i], "pred_dirs[i]");
      dirs.emplace_back(pred_dirs[i]);
    }
    fforge::pipeline::run_ensemble(config_of(cfg), dirs, out_dir);
  });
}

ff_status ff_polygonize(const ff_config* cfg, const char* pred_dir, const char* out_csv) {
  return guarded([&] {
    require(pred_dir, "pred_dir");
    require(out_csv, "out_csv");
    fforge::pipeline::run_polygonize(config_of(cfg), pred_dir, out_csv);
  });
}

ff_status ff_score(const ff_config* cfg, const char* manifest, const char* pred_csv, const char* split,
                   const char* subset, const char* city, const char* out_csv, ff_scores* out) {
  return guarded([&] {
    require(manifest, "manifest");
    require(pred_csv, "pred_csv");
    const fforge::ScoreRow row = fforge::pipeline::run_score(config_of(cfg), manifest, pred_csv, str(split),
                                                             subset ? subset : "all", str(city), str(out_csv));
    if (out) {
      *out = to_c(row.scores, row.tp, row.proposed, row.ground_truth);
      std::snprintf(out->city, sizeof out->city, "%s", row.city.c_str());
    }
  });
}

const char* ff_scores_format(const char* city, const ff_scores* scores) {
  g_format_buffer.clear();
  if (!scores) return g_format_buffer.c_str();
  fforge::ScoreRow row;
  row.city = city ? city : scores->city;
  row.scores = {scores->precision, scores->recall, scores->f1, scores->min_area};
  row.tp = scores->tp;
  row.proposed = scores->proposed;
  row.ground_truth = scores->ground_truth;
  g_format_buffer = fforge::score_text(std::span<const fforge::ScoreRow>(&row, 1));
  return g_format_buffer.c_str();
}

ff_status ff_raster_new(const char* image_id, size_t bands, size_t height, size_t width, const float* data,
                        ff_raster** out) {
  return guarded([&] {
    require(out, "out");
    fforge::MultiBandImage im(str(image_id), bands, height, width);
    if (data) std::copy(data, data + bands * height * width, im.samples().begin());
    *out = new ff_raster{std::move(im)};
  });
}

ff_status ff_raster_load(const char* header_path, ff_raster** out) {
  return guarded([&] {
    require(header_path, "header_path");
    require(out, "out");
    *out = new ff_raster{fforge::load_raster(header_path)};
  });
}

ff_status ff_raster_save(const ff_raster* raster, const char* header_path) {
  return guarded([&] {
    require(raster, "raster");
    require(header_path, "header_path");
    fforge::save_raster(raster->image, header_path);
  });
}

void ff_raster_free(ff_raster* raster) { delete raster; }

ff_status ff_raster_shape(const ff_raster* raster, size_t* bands, size_t* height, size_t* width) {
  return guarded([&] {
    require(raster, "raster");
    if (bands) *bands = raster->image.bands();
    if (height) *height = raster->image.height();
    if (width) *width = raster->image.width();
  });
}

const float* ff_raster_data(const ff_raster* raster) { return raster ? raster->image.samples().data() : nullptr; }

ff_status ff_model_load(const char* checkpoint, ff_model** out) {
  return guarded([&] {
    require(checkpoint, "checkpoint");
    require(out, "out");
    fforge::nn::Checkpoint ckpt = fforge::nn::load_checkpoint(checkpoint);
    fforge::nn::UNet<float> net(ckpt.config);
    net.set_params(ckpt.params);
    *out = new ff_model{std::move(ckpt), std::move(net)};
  });
}

void ff_model_free(ff_model* model) { delete model; }

ff_status ff_model_info(const ff_model* model, size_t* in_channels, size_t* depth, size_t* base_channels) {
  return guarded([&] {
    require(model, "model");
    if (in_channels) *in_channels = model->ckpt.config.in_channels;
    if (depth) *depth = model->ckpt.config.depth;
    if (base_channels) *base_channels = model->ckpt.config.base_channels;
  });
}

ff_status ff_model_predict(ff_model* model, const ff_raster* input, ff_raster** out) {
  return guarded([&] {
    require(model, "model");
    require(input, "input");
    require(out, "out");
    *out = new ff_raster{fforge::nn::predict(model->net, input->image)};
  });
}

ff_status ff_wkt_area(const char* wkt, double* area) {
  return guarded([&] {
    require(wkt, "wkt");
    require(area, "area");
    const auto p = fforge::parse_wkt(wkt);
    *area = p ? fforge::polygon_area(*p) : 0.0;
  });
}

ff_status ff_f1_score(size_t tp, size_t proposed, size_t ground_truth, ff_scores* out) {
  return guarded([&] {
    require(out, "out");
    *out = to_c(fforge::f1_score(tp, proposed, ground_truth), tp, proposed, ground_truth);
  });
}

ff_status ff_footprints_csv(const ff_raster* prediction, double threshold, double min_area, char** out_csv) {
  return guarded([&] {
    require(prediction, "prediction");
    require(out_csv, "out_csv");
    const auto polys = fforge::footprints_from_prediction(prediction->image, threshold, min_area);
    const std::string csv = fforge::format_summary_csv({{prediction->image.image_id(), polys}});
    char* s = static_cast<char*>(std::malloc(csv.size() + 1));
    if (!s) throw std::bad_alloc();
    std::memcpy(s, csv.c_str(), csv.size() + 1);
    *out_csv = s;
  });
}

void ff_string_free(char* s) { std::free(s); }

}  // extern "C"
