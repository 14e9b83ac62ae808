// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nn/adam.hpp"
#include "nn/params.hpp"
#include "nn/unet.hpp"
#include "raster.hpp"

namespace fforge::nn {

struct TrainSample {
  MultiBandImage input;  // C x H x W, already centered
  MultiBandImage label;  // 1 x H x W in [0,1]
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_jaccard = 0.0;
  double val_jaccard = 0.0;
  double val_f1 = 0.0;
};

struct TrainOptions {
  std::size_t epochs = 300;
  std::size_t batch = 64;
  std::uint64_t seed = 0;
  AdamOptions adam;
  // Validation footprints are extracted the same way as at prediction time.
  double threshold = 0.5;
  double min_area = 0.0;
  std::function<void(const EpochStats&)> on_epoch;
};

struct TrainResult {
  UNetConfig config;
  ParamStore<float> params;  // snapshot with the best validation (F1, soft-Jaccard)
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  std::vector<EpochStats> history;
};

Tensor4<float> to_tensor(std::span<const MultiBandImage> images);

// Splits a shuffled index list into batches of `batch`; a trailing singleton joins the previous batch.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& order, std::size_t batch);

TrainResult train(const UNetConfig& config, std::span<const TrainSample> train_set,
                  std::span<const TrainSample> val_set, const TrainOptions& options);

// Probability raster (1 band) for one input image.
MultiBandImage predict(UNet<float>& net, const MultiBandImage& input);

}  // namespace fforge::nn
