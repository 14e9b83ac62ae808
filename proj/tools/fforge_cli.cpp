// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library only through the C interface.

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fforge/fforge.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

int exit_code(ff_status s) {
  switch (s) {
    case FF_OK:
      return kExitOk;
    case FF_ERR_IO:
      return kExitIo;
    default:
      return kExitValidation;
  }
}

int report(ff_status s) {
  if (s != FF_OK) std::fprintf(stderr, "fforge: error: %s\n", ff_last_error());
  return exit_code(s);
}

const char* opt_cstr(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

struct ConfigGuard {
  ff_config* cfg = nullptr;
  ~ConfigGuard() { ff_config_free(cfg); }
};

// Flag values that override config keys, applied after --config and --set.
struct Overrides {
  std::map<std::string, std::string> values;

  void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help + " [" + key + "]");
  }
};

void print_train_line(const char* line, void*) {
  std::fprintf(stderr, "%s\n", line);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fforge: building footprint extraction from multispectral rasters"};
  app.set_version_flag("--version", ff_version());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  std::string jobs;
  app.add_option("--config", config_path, "INI file with [section] key = value settings");
  app.add_option("--set", sets, "Override a setting, e.g. --set train.epochs=40");
  app.add_option("--jobs", jobs, "Worker threads for per-image stages [general.jobs]");

  Overrides ov;
  std::string manifest, split, out, stats, pre_dir, label_dir, data_dir, model, subset = "all", pred_csv, city,
      variant;
  std::vector<std::string> pred_dirs;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene dataset");
  synth->add_option("--out", out, "Output directory")->required();
  ov.bind(synth, "--seed", "synth.seed", "Random seed");
  ov.bind(synth, "--n", "synth.n", "Number of scenes");
  ov.bind(synth, "--size", "synth.size", "Scene side length in pixels");
  ov.bind(synth, "--density", "synth.density", "Target roof fraction of the scene area");
  ov.bind(synth, "--city", "synth.city", "City name used in image ids");

  auto* split_cmd = app.add_subcommand("split", "Split a manifest into train/val/test");
  split_cmd->add_option("--manifest", manifest, "Dataset manifest")->required();
  split_cmd->add_option("--out", out, "Output split JSON")->required();
  ov.bind(split_cmd, "--seed", "split.seed", "Shuffle seed");

  auto* stats_cmd = app.add_subcommand("stats", "Per-channel statistics over the training images");
  stats_cmd->add_option("--manifest", manifest, "Dataset manifest")->required();
  stats_cmd->add_option("--split", split, "Split JSON (all images when omitted)");
  stats_cmd->add_option("--out", out, "Output statistics JSON")->required();

  auto* pre_cmd = app.add_subcommand("preprocess", "Clip to percentile bounds and min-max normalize");
  pre_cmd->add_option("--manifest", manifest, "Dataset manifest")->required();
  pre_cmd->add_option("--stats", stats, "Statistics JSON from 'stats'")->required();
  pre_cmd->add_option("--out", out, "Output directory")->required();

  auto* label_cmd = app.add_subcommand("label", "Signed-distance training labels");
  label_cmd->add_option("--manifest", manifest, "Dataset manifest")->required();
  label_cmd->add_option("--out", out, "Output directory")->required();
  ov.bind(label_cmd, "--tau", "label.tau", "Distance clamp in pixels");

  auto* tile_cmd = app.add_subcommand("tile", "Assemble model inputs and labels for one variant");
  tile_cmd->add_option("--variant", variant, "v1, v2 or v3")->required();
  tile_cmd->add_option("--manifest", manifest, "Dataset manifest")->required();
  tile_cmd->add_option("--pre", pre_dir, "Directory from 'preprocess'")->required();
  tile_cmd->add_option("--labels", label_dir, "Directory from 'label'")->required();
  tile_cmd->add_option("--split", split, "Split JSON; the mean image uses its training images")->required();
  tile_cmd->add_option("--out", out, "Output directory")->required();
  ov.bind(tile_cmd, "--input-size", "tile.input_size", "v1 model input side");
  ov.bind(tile_cmd, "--tile-size", "tile.size", "v2/v3 tile side");

  auto* train_cmd = app.add_subcommand("train", "Train a U-Net on prepared data");
  train_cmd->add_option("--variant", variant, "v1, v2 or v3 (must match the prepared data)");
  train_cmd->add_option("--data", data_dir, "Directory from 'tile'")->required();
  train_cmd->add_option("--split", split, "Split JSON")->required();
  train_cmd->add_option("--out", out, "Output checkpoint JSON")->required();
  ov.bind(train_cmd, "--epochs", "train.epochs", "Epochs");
  ov.bind(train_cmd, "--batch", "train.batch", "Mini-batch size");
  ov.bind(train_cmd, "--depth", "train.depth", "Down-sampling levels");
  ov.bind(train_cmd, "--base", "train.base", "Channels at the first level");
  ov.bind(train_cmd, "--seed", "train.seed", "Initialization and shuffle seed");
  ov.bind(train_cmd, "--lr", "adam.lr", "Learning rate");
  ov.bind(train_cmd, "--min-area", "polygonize.min_area", "Minimum footprint area for validation F1");

  auto* predict_cmd = app.add_subcommand("predict", "Probability maps at scene resolution");
  predict_cmd->add_option("--data", data_dir, "Directory from 'tile'")->required();
  predict_cmd->add_option("--model", model, "Checkpoint from 'train'")->required();
  predict_cmd->add_option("--split", split, "Split JSON");
  predict_cmd->add_option("--subset", subset, "train, val, test or all")
      ->check(CLI::IsMember({"train", "val", "test", "all"}));
  predict_cmd->add_option("--out", out, "Output directory")->required();

  auto* ens_cmd = app.add_subcommand("ensemble", "Average probability maps of several variants");
  ens_cmd->add_option("--pred", pred_dirs, "Prediction directories")->required();
  ens_cmd->add_option("--out", out, "Output directory")->required();

  auto* poly_cmd = app.add_subcommand("polygonize", "Threshold, extract and filter footprints");
  poly_cmd->add_option("--pred", data_dir, "Prediction directory")->required();
  poly_cmd->add_option("--out", out, "Output CSV")->required();
  ov.bind(poly_cmd, "--min-area", "polygonize.min_area", "Drop footprints smaller than this (px^2)");
  ov.bind(poly_cmd, "--threshold", "polygonize.threshold", "Probability threshold");

  auto* score_cmd = app.add_subcommand("score", "Match footprints against ground truth");
  score_cmd->add_option("--manifest", manifest, "Dataset manifest")->required();
  score_cmd->add_option("--pred", pred_csv, "Predictions CSV")->required();
  score_cmd->add_option("--split", split, "Split JSON");
  score_cmd->add_option("--subset", subset, "train, val, test or all")
      ->check(CLI::IsMember({"train", "val", "test", "all"}));
  score_cmd->add_option("--city", city, "City name for the report (manifest city by default)");
  score_cmd->add_option("--out", out, "Output score CSV");
  ov.bind(score_cmd, "--min-area", "polygonize.min_area", "minArea reported with the scores");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; anything else prints usage and exits 1.
    if (app.exit(e) == 0) return kExitOk;
    std::fprintf(stderr, "\n%s", app.help().c_str());
    return kExitValidation;
  }

  ConfigGuard cg;
  if (ff_status s = ff_config_new(&cg.cfg); s != FF_OK) return report(s);
  ff_config* cfg = cg.cfg;
  if (!config_path.empty()) {
    if (ff_status s = ff_config_load(cfg, config_path.c_str()); s != FF_OK) return report(s);
  }
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "fforge: --set expects key=value, got '%s'\n", kv.c_str());
      return kExitValidation;
    }
    if (ff_status s = ff_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()); s != FF_OK) {
      return report(s);
    }
  }
  if (!jobs.empty()) ov.values["general.jobs"] = jobs;
  for (const auto& [k, v] : ov.values) {
    if (ff_status s = ff_config_set(cfg, k.c_str(), v.c_str()); s != FF_OK) return report(s);
  }

  if (*synth) return report(ff_synth(cfg, out.c_str()));
  if (*split_cmd) return report(ff_split(cfg, manifest.c_str(), out.c_str()));
  if (*stats_cmd) return report(ff_stats(cfg, manifest.c_str(), opt_cstr(split), out.c_str()));
  if (*pre_cmd) return report(ff_preprocess(cfg, manifest.c_str(), stats.c_str(), out.c_str()));
  if (*label_cmd) return report(ff_label(cfg, manifest.c_str(), out.c_str()));
  if (*tile_cmd) {
    return report(ff_tile(cfg, variant.c_str(), manifest.c_str(), pre_dir.c_str(), label_dir.c_str(), split.c_str(),
                          out.c_str()));
  }
  if (*train_cmd) {
    return report(ff_train(cfg, opt_cstr(variant), data_dir.c_str(), split.c_str(), out.c_str(), print_train_line,
                           nullptr));
  }
  if (*predict_cmd) {
    return report(ff_predict(cfg, data_dir.c_str(), model.c_str(), opt_cstr(split), subset.c_str(), out.c_str()));
  }
  if (*ens_cmd) {
    std::vector<const char*> dirs;
    for (const auto& d : pred_dirs) dirs.push_back(d.c_str());
    return report(ff_ensemble(cfg, dirs.data(), dirs.size(), out.c_str()));
  }
  if (*poly_cmd) return report(ff_polygonize(cfg, data_dir.c_str(), out.c_str()));
  if (*score_cmd) {
    ff_scores sc{};
    const ff_status s = ff_score(cfg, manifest.c_str(), pred_csv.c_str(), opt_cstr(split), subset.c_str(),
                                 opt_cstr(city), opt_cstr(out), &sc);
    if (s == FF_OK) std::printf("%s", ff_scores_format(nullptr, &sc));
    return report(s);
  }
  return kExitValidation;
}
