// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "ensemble.hpp"
#include "error.hpp"
#include "labeling.hpp"
#include "nn/trainer.hpp"
#include "rng.hpp"
#include "support/oracles.hpp"

using namespace fforge;
using namespace fforge::nn;
using fforge::testing::rect;

namespace {

// Bright squares on a dark noisy background; binary target.
TrainSample square_sample(Rng& rng, const std::string& id, std::size_t size, std::size_t channels) {
  std::vector<Polygon> polys{fforge::testing::random_rect(rng, size, size, size / 2)};
  const BinaryMask m = rasterize(polys, size, size);
  TrainSample s;
  s.input = MultiBandImage(id, channels, size, size);
  for (std::size_t b = 0; b < channels; ++b)
    for (std::size_t r = 0; r < size; ++r)
      for (std::size_t c = 0; c < size; ++c)
        s.input.at(b, r, c) = static_cast<float>((m.get(r, c) ? 0.5 : -0.5) + 0.1 * rng.normal());
  s.label = MultiBandImage(id, 1, size, size);
  for (std::size_t i = 0; i < m.size(); ++i) s.label.samples()[i] = m.bits()[i] ? 1.0f : 0.0f;
  return s;
}

}  // namespace

TEST(Training, OverfitsSingleSample) {
  Rng rng(3);
  const std::vector<TrainSample> set{square_sample(rng, "one", 16, 2)};
  TrainOptions opt;
  opt.epochs = 150;
  opt.batch = 1;
  opt.adam.lr = 1e-2;
  const TrainResult res = train(UNetConfig{2, 1, 4}, set, set, opt);
  ASSERT_EQ(res.history.size(), 150u);
  EXPECT_LT(res.history.back().train_loss, 0.25 * res.history.front().train_loss);
  EXPECT_GT(res.history.back().train_jaccard, 0.9);

  UNet<float> net(res.config, res.params);
  const MultiBandImage p = nn::predict(net, set[0].input);
  EXPECT_EQ(threshold_mask(p.samples(), 16, 16), threshold_mask(set[0].label.samples(), 16, 16));
}

TEST(Training, DeterministicForFixedSeed) {
  Rng rng(5);
  std::vector<TrainSample> tr, va;
  for (int i = 0; i < 6; ++i) tr.push_back(square_sample(rng, "t" + std::to_string(i), 16, 3));
  for (int i = 0; i < 2; ++i) va.push_back(square_sample(rng, "v" + std::to_string(i), 16, 3));
  TrainOptions opt;
  opt.epochs = 4;
  opt.batch = 4;
  opt.seed = 17;
  const TrainResult a = train(UNetConfig{3, 2, 2}, tr, va, opt);
  const TrainResult b = train(UNetConfig{3, 2, 2}, tr, va, opt);
  EXPECT_TRUE(a.params == b.params);
  EXPECT_EQ(a.best_epoch, b.best_epoch);
  for (std::size_t e = 0; e < a.history.size(); ++e) {
    EXPECT_EQ(a.history[e].train_loss, b.history[e].train_loss);
    EXPECT_EQ(a.history[e].val_jaccard, b.history[e].val_jaccard);
  }
  opt.seed = 18;
  const TrainResult c = train(UNetConfig{3, 2, 2}, tr, va, opt);
  EXPECT_FALSE(a.params == c.params);
}

TEST(Training, BestEpochMaximizesValidationScore) {
  Rng rng(6);
  std::vector<TrainSample> tr, va;
  for (int i = 0; i < 4; ++i) tr.push_back(square_sample(rng, "t" + std::to_string(i), 16, 1));
  va.push_back(square_sample(rng, "v", 16, 1));
  std::vector<EpochStats> seen;
  TrainOptions opt;
  opt.epochs = 8;
  opt.batch = 2;
  opt.adam.lr = 5e-3;
  opt.on_epoch = [&](const EpochStats& s) { seen.push_back(s); };
  const TrainResult res = train(UNetConfig{1, 1, 2}, tr, va, opt);
  ASSERT_EQ(seen.size(), 8u);
  ASSERT_GE(res.best_epoch, 1u);
  const EpochStats& best = res.history[res.best_epoch - 1];
  for (const auto& e : res.history) {
    const bool better = e.val_f1 > best.val_f1 || (e.val_f1 == best.val_f1 && e.val_jaccard > best.val_jaccard);
    EXPECT_FALSE(better) << "epoch " << e.epoch;
  }
  // The snapshot reproduces the best epoch's validation Jaccard.
  UNet<float> net(res.config, res.params);
  const MultiBandImage p = nn::predict(net, va[0].input);
  double inter = 0, sp = 0, st = 0;
  for (std::size_t i = 0; i < p.samples().size(); ++i) {
    inter += double(p.samples()[i]) * va[0].label.samples()[i];
    sp += p.samples()[i];
    st += va[0].label.samples()[i];
  }
  EXPECT_NEAR(inter / (sp + st - inter), best.val_jaccard, 1e-6);
}

TEST(Training, RejectsInconsistentData) {
  Rng rng(7);
  std::vector<TrainSample> tr{square_sample(rng, "a", 16, 2)};
  TrainOptions opt;
  opt.epochs = 1;
  EXPECT_THROW(train(UNetConfig{3, 1, 2}, tr, tr, opt), ValidationError);
  EXPECT_THROW(train(UNetConfig{2, 1, 2}, {}, tr, opt), ValidationError);
  tr[0].label = MultiBandImage("a", 1, 8, 8);
  EXPECT_THROW(train(UNetConfig{2, 1, 2}, tr, tr, opt), ValidationError);
}

TEST(Training, PredictReturnsProbabilityRaster) {
  UNet<float> net(UNetConfig{2, 2, 2});
  net.initialize(0);
  MultiBandImage in("x", 2, 8, 12, 0.25f);
  GeoTransform gt;
  gt.c = {1, 1, 0, 1, 0, -1};
  in.set_geotransform(gt);
  const MultiBandImage p = nn::predict(net, in);
  EXPECT_EQ(p.bands(), 1u);
  EXPECT_EQ(p.height(), 8u);
  EXPECT_EQ(p.width(), 12u);
  EXPECT_EQ(p.image_id(), "x");
  for (float v : p.samples()) {
    EXPECT_GT(v, 0.0f);
    EXPECT_LT(v, 1.0f);
  }
}
