// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/trainer.hpp"

#include <numeric>

#include "ensemble.hpp"
#include "evaluation.hpp"
#include "labeling.hpp"
#include "rng.hpp"

namespace fforge::nn {

namespace {

// Seeds the shuffle stream independently of weight initialization.
constexpr std::uint64_t kShuffleStream = 0x9e3779b97f4a7c15ULL;

struct ValidationMetrics {
  double jaccard = 0.0;
  double f1 = 0.0;
};

ValidationMetrics evaluate(UNet<float>& net, std::span<const TrainSample> val_set,
                           const std::vector<std::vector<Polygon>>& truth, const TrainOptions& opt) {
  double inter = 0.0, sp = 0.0, st = 0.0;
  std::vector<MatchReport> reports;
  reports.reserve(val_set.size());
  for (std::size_t i = 0; i < val_set.size(); ++i) {
    const MultiBandImage prob = predict(net, val_set[i].input);
    const auto& p = prob.samples();
    const auto& t = val_set[i].label.samples();
    for (std::size_t k = 0; k < p.size(); ++k) {
      inter += static_cast<double>(p[k]) * t[k];
      sp += p[k];
      st += t[k];
    }
    const auto found = footprints_from_prediction(prob, opt.threshold, opt.min_area);
    reports.push_back(match_polygons(found, truth[i], prob.height(), prob.width()));
  }
  ValidationMetrics m;
  m.jaccard = (sp == 0.0 && st == 0.0) ? 1.0 : inter / (sp + st - inter);
  m.f1 = score_report(reports, "val", opt.min_area).scores.f1;
  return m;
}

void check_dataset(std::span<const TrainSample> set, const UNetConfig& cfg, const char* what) {
  if (set.empty()) throw ValidationError(std::string(what) + " set is empty");
  const auto& first = set.front().input;
  for (const auto& s : set) {
    if (s.input.bands() != cfg.in_channels) {
      throw ValidationError(std::string(what) + " sample '" + s.input.image_id() + "' has " +
                            std::to_string(s.input.bands()) + " channels, network expects " +
                            std::to_string(cfg.in_channels));
    }
    if (s.input.height() != first.height() || s.input.width() != first.width()) {
      throw ValidationError(std::string(what) + " samples differ in size");
    }
    if (s.label.bands() != 1 || s.label.height() != s.input.height() || s.label.width() != s.input.width()) {
      throw ValidationError(std::string(what) + " label for '" + s.input.image_id() + "' does not match its input");
    }
  }
}

}  // namespace

Tensor4<float> to_tensor(std::span<const MultiBandImage> images) {
  if (images.empty()) return {};
  const auto& f = images.front();
  Tensor4<float> t(images.size(), f.bands(), f.height(), f.width());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!images[i].same_shape(f)) throw ValidationError("to_tensor: images differ in shape");
    std::copy(images[i].samples().begin(), images[i].samples().end(), t.sample(i));
  }
  return t;
}

std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& order, std::size_t batch) {
  if (batch == 0) throw ValidationError("batch size must be >= 1");
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < order.size(); i += batch) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch)));
  }
  if (out.size() > 1 && out.back().size() == 1) {
    out[out.size() - 2].push_back(out.back().front());
    out.pop_back();
  }
  return out;
}

TrainResult train(const UNetConfig& config, std::span<const TrainSample> train_set,
                  std::span<const TrainSample> val_set, const TrainOptions& options) {
  config.validate();
  check_dataset(train_set, config, "training");
  check_dataset(val_set, config, "validation");

  UNet<float> net(config);
  net.initialize(options.seed);

  TrainResult result;
  result.config = config;
  result.params = net.params();
  if (options.epochs == 0) return result;

  std::vector<std::vector<Polygon>> truth;
  truth.reserve(val_set.size());
  for (const auto& s : val_set) {
    truth.push_back(extract_polygons(threshold_mask(s.label.band(0), s.label.height(), s.label.width(), 0.5)));
  }

  Rng shuffle_rng(options.seed ^ kShuffleStream);
  AdamState<float> adam;
  adam.options = options.adam;
  ParamStore<float> grads = net.params().zeros_like();
  std::vector<std::size_t> order(train_set.size());
  double best_f1 = -1.0, best_jaccard = -1.0;

  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0, jac_sum = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : make_batches(order, options.batch)) {
      std::vector<MultiBandImage> inputs, labels;
      inputs.reserve(batch.size());
      labels.reserve(batch.size());
      for (std::size_t idx : batch) {
        inputs.push_back(train_set[idx].input);
        labels.push_back(train_set[idx].label);
      }
      const Tensor4<float> x = to_tensor(inputs);
      const Tensor4<float> y = to_tensor(labels);
      const Tensor4<float> logits = net.forward(x, Mode::kTrain);
      Tensor4<float> prob, dlogits;
      const LossValue loss = segmentation_loss(logits, y, prob, dlogits);
      grads.fill_zero();
      net.backward(dlogits, grads);
      adam_step(net.params(), grads, adam);
      loss_sum += loss.total * static_cast<double>(batch.size());
      jac_sum += loss.jaccard * static_cast<double>(batch.size());
      seen += batch.size();
    }

    const ValidationMetrics vm = evaluate(net, val_set, truth, options);
    EpochStats st{epoch, loss_sum / static_cast<double>(seen), jac_sum / static_cast<double>(seen), vm.jaccard,
                  vm.f1};
    result.history.push_back(st);
    if (options.on_epoch) options.on_epoch(st);
    if (vm.f1 > best_f1 || (vm.f1 == best_f1 && vm.jaccard > best_jaccard)) {
      best_f1 = vm.f1;
      best_jaccard = vm.jaccard;
      result.params = net.params();
      result.best_epoch = epoch;
    }
  }
  return result;
}

MultiBandImage predict(UNet<float>& net, const MultiBandImage& input) {
  const Tensor4<float> x = to_tensor(std::span<const MultiBandImage>(&input, 1));
  const Tensor4<float> p = net.predict(x);
  MultiBandImage out(input.image_id(), 1, input.height(), input.width(), p.data);
  out.set_geotransform(input.geotransform());
  return out;
}

}  // namespace fforge::nn
