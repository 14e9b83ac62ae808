// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "nn/params.hpp"

namespace fforge::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
};

// One bias-corrected ADAM update of every trainable parameter.
template <typename T>
void adam_step(ParamStore<T>& params, const ParamStore<T>& grads, AdamState<T>& state) {
  auto& ps = params.all();
  const auto& gs = grads.all();
  if (gs.size() != ps.size()) throw ValidationError("adam_step: gradient store does not match parameters");
  if (state.m.empty()) {
    state.m.resize(ps.size());
    state.v.resize(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
      state.m[i].assign(ps[i].value.size(), T(0));
      state.v[i].assign(ps[i].value.size(), T(0));
    }
  }
  ++state.step;
  const AdamOptions& o = state.options;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!ps[i].trainable) continue;
    auto& theta = ps[i].value;
    const auto& g = gs[i].value;
    if (g.size() != theta.size()) throw ValidationError("adam_step: shape mismatch for " + ps[i].name);
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double gk = g[k];
      const double mk = o.beta1 * static_cast<double>(m[k]) + (1.0 - o.beta1) * gk;
      const double vk = o.beta2 * static_cast<double>(v[k]) + (1.0 - o.beta2) * gk * gk;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      const double m_hat = mk / c1;
      const double v_hat = vk / c2;
      theta[k] = static_cast<T>(static_cast<double>(theta[k]) - o.lr * m_hat / (std::sqrt(v_hat) + o.eps));
    }
  }
}

}  // namespace fforge::nn
