// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nn/layers.hpp"
#include "nn/params.hpp"
#include "nn/tensor.hpp"
#include "rng.hpp"

namespace fforge::nn {

struct UNetConfig {
  std::size_t in_channels = 8;
  std::size_t depth = 3;
  std::size_t base_channels = 8;

  void validate() const {
    if (in_channels == 0) throw ValidationError("UNetConfig: in_channels must be >= 1");
    if (depth == 0) throw ValidationError("UNetConfig: depth must be >= 1");
    if (base_channels == 0) throw ValidationError("UNetConfig: base_channels must be >= 1");
  }
  std::size_t channels_at(std::size_t level) const { return base_channels << level; }
  // Input height/width must be a multiple of this.
  std::size_t size_multiple() const { return std::size_t{1} << depth; }
  bool operator==(const UNetConfig&) const = default;
};

enum class Mode { kTrain, kInfer };

// Encoder-decoder with skip connections. Every convolution is followed by batch
// normalization and ReLU; the head is a 1x1 convolution producing one logit channel.
//
//   enc_l:  [conv3 -> BN -> ReLU] x2, keep as skip_l, maxpool2
//   mid:    [conv3 -> BN -> ReLU] x2
//   dec_l:  upsample2 -> conv2 -> BN -> ReLU, concat(skip_l, .), [conv3 -> BN -> ReLU] x2
//   head:   conv1 -> logits (sigmoid applied by the caller / predict)
template <typename T>
class UNet {
 public:
  explicit UNet(UNetConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    for (std::size_t l = 0; l < cfg_.depth; ++l) {
      const std::size_t in = l == 0 ? cfg_.in_channels : cfg_.channels_at(l - 1);
      add_unit(enc_name(l, "a"), {in, cfg_.channels_at(l), 3});
      add_unit(enc_name(l, "b"), {cfg_.channels_at(l), cfg_.channels_at(l), 3});
    }
    add_unit("mid.a", {cfg_.channels_at(cfg_.depth - 1), cfg_.channels_at(cfg_.depth), 3});
    add_unit("mid.b", {cfg_.channels_at(cfg_.depth), cfg_.channels_at(cfg_.depth), 3});
    for (std::size_t l = cfg_.depth; l-- > 0;) {
      const std::size_t c = cfg_.channels_at(l);
      add_unit(dec_name(l, "up"), {cfg_.channels_at(l + 1), c, 2});
      add_unit(dec_name(l, "a"), {2 * c, c, 3});
      add_unit(dec_name(l, "b"), {c, c, 3});
    }
    head_ = {cfg_.channels_at(0), 1, 1};
    params_.add("head.weight", {1, head_.in_channels, 1, 1}, true, T(0));
    params_.add("head.bias", {1}, true, T(0));
  }

  UNet(UNetConfig cfg, ParamStore<T> params) : UNet(cfg) { set_params(std::move(params)); }

  const UNetConfig& config() const { return cfg_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }

  void set_params(ParamStore<T> p) {
    if (p.size() != params_.size()) throw ValidationError("parameter store does not match network layout");
    for (const auto& want : params_.all()) {
      const auto& got = p.find(want.name);
      if (got.shape != want.shape) throw ValidationError("parameter " + want.name + " has the wrong shape");
    }
    params_ = std::move(p);
  }

  // Fan-in scaled uniform kernels (He bound sqrt(6/fan_in)); zero bias/shift, unit gain.
  void initialize(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& p : params_.all()) {
      const std::string& n = p.name;
      if (ends_with(n, ".weight")) {
        const std::size_t fan_in = p.shape[1] * p.shape[2] * p.shape[3];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (auto& v : p.value) v = static_cast<T>(rng.uniform(-bound, bound));
      } else if (ends_with(n, ".gamma") || ends_with(n, ".running_var")) {
        std::fill(p.value.begin(), p.value.end(), T(1));
      } else {
        std::fill(p.value.begin(), p.value.end(), T(0));
      }
    }
  }

  // Returns logits (N x 1 x H x W). Train mode caches activations for backward() and
  // updates running statistics.
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) {
    if (x.c != cfg_.in_channels) {
      throw ValidationError("network expects " + std::to_string(cfg_.in_channels) + " channels, got " +
                            std::to_string(x.c));
    }
    const std::size_t m = cfg_.size_multiple();
    if (x.h % m != 0 || x.w % m != 0 || x.h == 0 || x.w == 0) {
      throw ValidationError("input " + x.shape_string() + " must have H, W divisible by " + std::to_string(m));
    }
    mode_ = mode;
    caches_.clear();
    skips_.assign(cfg_.depth, {});
    pool_argmax_.assign(cfg_.depth, {});

    Tensor4<T> h = x;
    for (std::size_t l = 0; l < cfg_.depth; ++l) {
      h = unit_forward(enc_name(l, "a"), h);
      h = unit_forward(enc_name(l, "b"), h);
      skips_[l] = h;
      h = maxpool2_forward(h, pool_argmax_[l]);
    }
    h = unit_forward("mid.a", h);
    h = unit_forward("mid.b", h);
    bottleneck_ = {h.n, h.c, h.h, h.w};
    for (std::size_t l = cfg_.depth; l-- > 0;) {
      Tensor4<T> u = upsample2_forward(h);
      u = unit_forward(dec_name(l, "up"), u);
      h = concat_channels(skips_[l], u);
      h = unit_forward(dec_name(l, "a"), h);
      h = unit_forward(dec_name(l, "b"), h);
    }
    head_input_ = h;
    return conv2d_forward(h, head_, params_["head.weight"], params_["head.bias"]);
  }

  // Gradients for the last train-mode forward(); `grads` must come from params().zeros_like()
  // and is accumulated into.
  Tensor4<T> backward(const Tensor4<T>& dlogits, ParamStore<T>& grads) {
    if (mode_ != Mode::kTrain) throw ValidationError("backward() requires a train-mode forward()");
    Tensor4<T> dh = conv2d_backward(head_input_, head_, params_["head.weight"], dlogits,
                                    grads["head.weight"], grads["head.bias"]);
    std::vector<Tensor4<T>> dskips(cfg_.depth);
    for (std::size_t l = 0; l < cfg_.depth; ++l) {
      dh = unit_backward(dec_name(l, "b"), dh, grads);
      dh = unit_backward(dec_name(l, "a"), dh, grads);
      Tensor4<T> du;
      split_channels(dh, cfg_.channels_at(l), dskips[l], du);
      du = unit_backward(dec_name(l, "up"), du, grads);
      dh = upsample2_backward(du);
    }
    dh = unit_backward("mid.b", dh, grads);
    dh = unit_backward("mid.a", dh, grads);
    for (std::size_t l = cfg_.depth; l-- > 0;) {
      dh = maxpool2_backward(skips_[l], pool_argmax_[l], dh);
      for (std::size_t i = 0; i < dh.size(); ++i) dh.data[i] += dskips[l].data[i];
      dh = unit_backward(enc_name(l, "b"), dh, grads);
      dh = unit_backward(enc_name(l, "a"), dh, grads);
    }
    return dh;
  }

  // Shape (n, c, h, w) of the bottleneck activation from the last forward().
  std::array<std::size_t, 4> bottleneck_shape() const { return bottleneck_; }

  // Sigmoid probabilities in inference mode.
  Tensor4<T> predict(const Tensor4<T>& x) { return sigmoid_forward(forward(x, Mode::kInfer)); }

 private:
  struct UnitCache {
    Tensor4<T> x;
    BatchNormCache<T> bn;
    Tensor4<T> y;
  };

  static bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  }
  static std::string enc_name(std::size_t l, const char* part) { return "enc" + std::to_string(l) + "." + part; }
  static std::string dec_name(std::size_t l, const char* part) { return "dec" + std::to_string(l) + "." + part; }

  void add_unit(const std::string& name, ConvShape s) {
    shapes_.emplace(name, s);
    params_.add(name + ".weight", {s.out_channels, s.in_channels, s.kernel, s.kernel}, true, T(0));
    params_.add(name + ".bias", {s.out_channels}, true, T(0));
    params_.add(name + ".gamma", {s.out_channels}, true, T(1));
    params_.add(name + ".beta", {s.out_channels}, true, T(0));
    params_.add(name + ".running_mean", {s.out_channels}, false, T(0));
    params_.add(name + ".running_var", {s.out_channels}, false, T(1));
  }

  Tensor4<T> unit_forward(const std::string& name, const Tensor4<T>& x) {
    const ConvShape& s = shapes_.at(name);
    Tensor4<T> z = conv2d_forward(x, s, params_[name + ".weight"], params_[name + ".bias"]);
    Tensor4<T> y;
    if (mode_ == Mode::kTrain) {
      UnitCache& c = caches_[name];
      c.x = x;
      y = relu_forward(batch_norm_train(z, params_[name + ".gamma"], params_[name + ".beta"],
                                        params_[name + ".running_mean"], params_[name + ".running_var"], c.bn));
      c.y = y;
    } else {
      y = relu_forward(batch_norm_infer(z, params_[name + ".gamma"], params_[name + ".beta"],
                                        params_[name + ".running_mean"], params_[name + ".running_var"]));
    }
    return y;
  }

  Tensor4<T> unit_backward(const std::string& name, const Tensor4<T>& dy, ParamStore<T>& grads) {
    UnitCache& c = caches_.at(name);
    const ConvShape& s = shapes_.at(name);
    Tensor4<T> dz = relu_backward(c.y, dy);
    dz = batch_norm_backward(c.bn, params_[name + ".gamma"], dz, grads[name + ".gamma"], grads[name + ".beta"]);
    return conv2d_backward(c.x, s, params_[name + ".weight"], dz, grads[name + ".weight"], grads[name + ".bias"]);
  }

  UNetConfig cfg_;
  ParamStore<T> params_;
  std::map<std::string, ConvShape> shapes_;
  ConvShape head_;

  Mode mode_ = Mode::kInfer;
  std::map<std::string, UnitCache> caches_;
  std::vector<Tensor4<T>> skips_;
  std::vector<std::vector<std::uint32_t>> pool_argmax_;
  Tensor4<T> head_input_;
  std::array<std::size_t, 4> bottleneck_{};
};

}  // namespace fforge::nn
