// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "ensemble.hpp"
#include "evaluation.hpp"
#include "nn/trainer.hpp"

namespace fforge::pipeline {

// Flat "section.key" settings with defaults; unknown keys are rejected.
class Config {
 public:
  Config();

  // INI file with [section] headers and key = value lines.
  void load_ini(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool is_default(const std::string& key) const;

  double get_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::size_t get_size(const std::string& key) const { return static_cast<std::size_t>(get_u64(key)); }

  static std::vector<std::string> keys();

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> overridden_;
};

SynthOptions synth_options(const Config& cfg);
nn::UNetConfig network_config(const Config& cfg, std::size_t in_channels);
nn::TrainOptions train_options(const Config& cfg);

// Runs fn(i) for i in [0, n) on up to `jobs` threads; the first exception is rethrown.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

// Stages. Directory layouts are fixed by convention:
//   preprocess -> <dir>/<id>_rgb.json, <dir>/<id>_mul.json
//   label      -> <dir>/<id>_label.json
//   tile       -> <dir>/variant.json, mean.json, x_<sample>.json, y_<sample>.json
//   predict    -> <dir>/<id>_pred.json (parent resolution)
Manifest run_synth(const Config& cfg, const std::filesystem::path& out_dir);
DatasetSplit run_split(const Config& cfg, const std::filesystem::path& manifest, const std::filesystem::path& out);
// Statistics pooled over the training images (all images when `split` is empty).
void run_stats(const Config& cfg, const std::filesystem::path& manifest, const std::filesystem::path& split,
               const std::filesystem::path& out);
void run_preprocess(const Config& cfg, const std::filesystem::path& manifest, const std::filesystem::path& stats,
                    const std::filesystem::path& out_dir);
void run_label(const Config& cfg, const std::filesystem::path& manifest, const std::filesystem::path& out_dir);
void run_tile(const Config& cfg, VariantId variant, const std::filesystem::path& manifest,
              const std::filesystem::path& pre_dir, const std::filesystem::path& label_dir,
              const std::filesystem::path& split, const std::filesystem::path& out_dir);
nn::TrainResult run_train(const Config& cfg, const std::filesystem::path& data_dir,
                          const std::filesystem::path& split, const std::filesystem::path& checkpoint,
                          std::ostream* log = nullptr, std::optional<VariantId> expected = std::nullopt);
// `subset` is train, val, test or all.
void run_predict(const Config& cfg, const std::filesystem::path& data_dir, const std::filesystem::path& checkpoint,
                 const std::filesystem::path& split, const std::string& subset, const std::filesystem::path& out_dir);
void run_ensemble(const Config& cfg, const std::vector<std::filesystem::path>& pred_dirs,
                  const std::filesystem::path& out_dir);
void run_polygonize(const Config& cfg, const std::filesystem::path& pred_dir, const std::filesystem::path& out_csv);
// Scores predictions against the manifest's footprints, restricted to `subset` of `split` when given.
ScoreRow run_score(const Config& cfg, const std::filesystem::path& manifest, const std::filesystem::path& pred_csv,
                   const std::filesystem::path& split, const std::string& subset, const std::string& city,
                   const std::filesystem::path& out_csv);

}  // namespace fforge::pipeline
