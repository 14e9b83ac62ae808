// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

// Central finite-difference checks of every backward pass, in double precision.
// Each check draws a random shape and random inputs, forms the scalar
// L = sum(r * y) for a random weighting r (or the loss itself for losses), and
// compares the analytic gradient of every input against the numeric one.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nn/layers.hpp"
#include "nn/unet.hpp"
#include "rng.hpp"

namespace fforge::testing {

using nn::Tensor4;

inline constexpr double kFdStep = 1e-6;
inline constexpr double kGradTolerance = 1e-4;

struct GradCheck {
  std::string shape;
  double error = 0.0;  // worst relative error over the op's inputs
};

// ||a - b|| / max(||a||, ||b||); 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale < 1e-300 ? 0.0 : std::sqrt(d) / scale;
}

template <typename F>
std::vector<double> numeric_gradient(std::vector<double>& v, F&& loss) {
  std::vector<double> g(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double keep = v[i];
    v[i] = keep + kFdStep;
    const double up = loss();
    v[i] = keep - kFdStep;
    const double down = loss();
    v[i] = keep;
    g[i] = (up - down) / (2.0 * kFdStep);
  }
  return g;
}

inline Tensor4<double> random_tensor(Rng& rng, std::size_t n, std::size_t c, std::size_t h, std::size_t w,
                                     double lo = -1.0, double hi = 1.0) {
  Tensor4<double> t(n, c, h, w);
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

inline double weighted(const Tensor4<double>& y, const Tensor4<double>& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y.data[i] * r.data[i];
  return s;
}

inline std::string shape_of(const Tensor4<double>& t) { return t.shape_string(); }

inline GradCheck check_conv(Rng& rng) {
  const std::size_t k = 1 + rng.below(3);
  nn::ConvShape s{1 + rng.below(4), 1 + rng.below(4), k};
  Tensor4<double> x = random_tensor(rng, 1 + rng.below(2), s.in_channels, 1 + rng.below(6), 1 + rng.below(6));
  std::vector<double> wt(s.weight_count()), b(s.out_channels);
  for (auto& v : wt) v = rng.uniform(-1, 1);
  for (auto& v : b) v = rng.uniform(-1, 1);
  const Tensor4<double> r = random_tensor(rng, x.n, s.out_channels, x.h, x.w);
  auto loss = [&] { return weighted(nn::conv2d_forward(x, s, wt, b), r); };
  std::vector<double> dw(wt.size(), 0.0), db(b.size(), 0.0);
  const Tensor4<double> dx = nn::conv2d_backward(x, s, wt, r, dw, db);
  double err = relative_error(dx.data, numeric_gradient(x.data, loss));
  err = std::max(err, relative_error(dw, numeric_gradient(wt, loss)));
  err = std::max(err, relative_error(db, numeric_gradient(b, loss)));
  return {shape_of(x) + " k" + std::to_string(k) + " out" + std::to_string(s.out_channels), err};
}

inline GradCheck check_batch_norm(Rng& rng) {
  std::size_t n = 0, h = 0, w = 0;
  do {
    n = 1 + rng.below(3);
    h = 1 + rng.below(4);
    w = 1 + rng.below(4);
  } while (n * h * w < 2);
  const std::size_t c = 1 + rng.below(3);
  Tensor4<double> x = random_tensor(rng, n, c, h, w, -2.0, 2.0);
  std::vector<double> gamma(c), beta(c), rm(c, 0.0), rv(c, 1.0);
  for (auto& v : gamma) v = rng.uniform(0.5, 1.5);
  for (auto& v : beta) v = rng.uniform(-1, 1);
  const Tensor4<double> r = random_tensor(rng, n, c, h, w);
  nn::BatchNormCache<double> cache;
  auto loss = [&] {
    nn::BatchNormCache<double> tmp;
    return weighted(nn::batch_norm_train(x, gamma, beta, rm, rv, tmp), r);
  };
  nn::batch_norm_train(x, gamma, beta, rm, rv, cache);
  std::vector<double> dg(c, 0.0), dbeta(c, 0.0);
  const Tensor4<double> dx = nn::batch_norm_backward(cache, gamma, r, dg, dbeta);
  double err = relative_error(dx.data, numeric_gradient(x.data, loss));
  err = std::max(err, relative_error(dg, numeric_gradient(gamma, loss)));
  err = std::max(err, relative_error(dbeta, numeric_gradient(beta, loss)));
  return {shape_of(x), err};
}

inline GradCheck check_relu(Rng& rng) {
  Tensor4<double> x = random_tensor(rng, 1 + rng.below(2), 1 + rng.below(3), 1 + rng.below(5), 1 + rng.below(5));
  // Keep inputs away from the kink so the central difference never straddles it.
  for (auto& v : x.data) {
    if (std::abs(v) < 1e-3) v = 0.5;
  }
  const Tensor4<double> r = random_tensor(rng, x.n, x.c, x.h, x.w);
  auto loss = [&] { return weighted(nn::relu_forward(x), r); };
  const Tensor4<double> dx = nn::relu_backward(nn::relu_forward(x), r);
  return {shape_of(x), relative_error(dx.data, numeric_gradient(x.data, loss))};
}

inline GradCheck check_sigmoid(Rng& rng) {
  Tensor4<double> x =
      random_tensor(rng, 1 + rng.below(2), 1 + rng.below(3), 1 + rng.below(5), 1 + rng.below(5), -6.0, 6.0);
  const Tensor4<double> r = random_tensor(rng, x.n, x.c, x.h, x.w);
  auto loss = [&] { return weighted(nn::sigmoid_forward(x), r); };
  const Tensor4<double> dx = nn::sigmoid_backward(nn::sigmoid_forward(x), r);
  return {shape_of(x), relative_error(dx.data, numeric_gradient(x.data, loss))};
}

inline GradCheck check_maxpool(Rng& rng) {
  Tensor4<double> x =
      random_tensor(rng, 1 + rng.below(2), 1 + rng.below(3), 2 * (1 + rng.below(3)), 2 * (1 + rng.below(3)));
  const Tensor4<double> r = random_tensor(rng, x.n, x.c, x.h / 2, x.w / 2);
  std::vector<std::uint32_t> argmax;
  auto loss = [&] {
    std::vector<std::uint32_t> a;
    return weighted(nn::maxpool2_forward(x, a), r);
  };
  nn::maxpool2_forward(x, argmax);
  const Tensor4<double> dx = nn::maxpool2_backward(x, argmax, r);
  return {shape_of(x), relative_error(dx.data, numeric_gradient(x.data, loss))};
}

inline GradCheck check_upsample(Rng& rng) {
  Tensor4<double> x = random_tensor(rng, 1 + rng.below(2), 1 + rng.below(3), 1 + rng.below(4), 1 + rng.below(4));
  const Tensor4<double> r = random_tensor(rng, x.n, x.c, 2 * x.h, 2 * x.w);
  auto loss = [&] { return weighted(nn::upsample2_forward(x), r); };
  const Tensor4<double> dx = nn::upsample2_backward(r);
  return {shape_of(x), relative_error(dx.data, numeric_gradient(x.data, loss))};
}

inline GradCheck check_concat(Rng& rng) {
  const std::size_t n = 1 + rng.below(2), h = 1 + rng.below(4), w = 1 + rng.below(4);
  Tensor4<double> a = random_tensor(rng, n, 1 + rng.below(3), h, w);
  Tensor4<double> b = random_tensor(rng, n, 1 + rng.below(3), h, w);
  const Tensor4<double> r = random_tensor(rng, n, a.c + b.c, h, w);
  auto loss = [&] { return weighted(nn::concat_channels(a, b), r); };
  Tensor4<double> da, db;
  nn::split_channels(r, a.c, da, db);
  const double err =
      std::max(relative_error(da.data, numeric_gradient(a.data, loss)),
               relative_error(db.data, numeric_gradient(b.data, loss)));
  return {shape_of(a) + "+" + std::to_string(b.c), err};
}

inline GradCheck check_soft_jaccard(Rng& rng) {
  Tensor4<double> p =
      random_tensor(rng, 1 + rng.below(2), 1, 1 + rng.below(6), 1 + rng.below(6), 0.05, 0.95);
  const Tensor4<double> t = random_tensor(rng, p.n, 1, p.h, p.w, 0.0, 1.0);
  auto loss = [&] { return nn::soft_jaccard(p, t); };
  const Tensor4<double> g = nn::soft_jaccard_grad(p, t);
  return {shape_of(p), relative_error(g.data, numeric_gradient(p.data, loss))};
}

inline GradCheck check_bce(Rng& rng) {
  Tensor4<double> p =
      random_tensor(rng, 1 + rng.below(2), 1, 1 + rng.below(6), 1 + rng.below(6), 0.05, 0.95);
  const Tensor4<double> t = random_tensor(rng, p.n, 1, p.h, p.w, 0.0, 1.0);
  auto loss = [&] { return nn::bce_loss(p, t); };
  const Tensor4<double> g = nn::bce_grad(p, t);
  return {shape_of(p), relative_error(g.data, numeric_gradient(p.data, loss))};
}

// Combined objective with respect to the logits, through the sigmoid.
inline GradCheck check_segmentation_loss(Rng& rng) {
  Tensor4<double> z =
      random_tensor(rng, 1 + rng.below(2), 1, 1 + rng.below(6), 1 + rng.below(6), -4.0, 4.0);
  const Tensor4<double> t = random_tensor(rng, z.n, 1, z.h, z.w, 0.0, 1.0);
  auto loss = [&] {
    Tensor4<double> p, d;
    return nn::segmentation_loss(z, t, p, d).total;
  };
  Tensor4<double> p, dz;
  nn::segmentation_loss(z, t, p, dz);
  return {shape_of(z), relative_error(dz.data, numeric_gradient(z.data, loss))};
}

// Whole network: every trainable parameter against L = sum(r * logits).
inline GradCheck check_unet(Rng& rng) {
  nn::UNetConfig cfg{1 + rng.below(3), 1 + rng.below(2), 1 + rng.below(3)};
  const std::size_t m = cfg.size_multiple();
  std::size_t n = 0, h = 0, w = 0;
  do {
    n = 1 + rng.below(2);
    h = m * (1 + rng.below(2));
    w = m * (1 + rng.below(2));
  } while (n * (h / m) * (w / m) < 2);
  nn::UNet<double> net(cfg);
  net.initialize(rng.next());
  const Tensor4<double> x = random_tensor(rng, n, cfg.in_channels, h, w);
  const Tensor4<double> r = random_tensor(rng, n, 1, h, w);
  net.forward(x, nn::Mode::kTrain);
  nn::ParamStore<double> grads = net.params().zeros_like();
  net.backward(r, grads);
  std::vector<double> analytic, numeric;
  for (std::size_t k = 0; k < net.params().all().size(); ++k) {
    auto& p = net.params().all()[k];
    if (!p.trainable) continue;
    const auto& g = grads.all()[k].value;
    analytic.insert(analytic.end(), g.begin(), g.end());
    const auto num = numeric_gradient(p.value, [&] { return weighted(net.forward(x, nn::Mode::kTrain), r); });
    numeric.insert(numeric.end(), num.begin(), num.end());
  }
  return {"in" + std::to_string(cfg.in_channels) + " depth" + std::to_string(cfg.depth) + " base" +
              std::to_string(cfg.base_channels) + " " + shape_of(x),
          relative_error(analytic, numeric)};
}

inline std::vector<std::pair<std::string, std::function<GradCheck(Rng&)>>> gradient_checks() {
  return {
      {"conv2d", check_conv},
      {"batch_norm", check_batch_norm},
      {"relu", check_relu},
      {"sigmoid", check_sigmoid},
      {"maxpool2", check_maxpool},
      {"upsample2", check_upsample},
      {"concat", check_concat},
      {"soft_jaccard", check_soft_jaccard},
      {"bce", check_bce},
      {"segmentation_loss", check_segmentation_loss},
      {"unet", check_unet},
  };
}

}  // namespace fforge::testing
