// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

// Forward/backward kernels for the segmentation network. Every kernel is a template
// over the scalar type so the same code runs in float for training and in double for
// finite-difference checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "nn/tensor.hpp"

namespace fforge::nn {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

// ---------------------------------------------------------------------------
// Convolution: stride 1, "same" output size. For even kernels the extra padding row/col
// goes to the bottom/right.

struct ConvShape {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;

  std::size_t pad_before() const { return (kernel - 1) / 2; }
  std::size_t weight_count() const { return out_channels * in_channels * kernel * kernel; }
  std::size_t patch() const { return in_channels * kernel * kernel; }
};

template <typename T>
void im2col(const T* x, std::size_t channels, std::size_t h, std::size_t w, std::size_t k,
            std::size_t pad, T* cols) {
  const std::size_t hw = h * w;
  for (std::size_t ci = 0; ci < channels; ++ci) {
    const T* plane = x + ci * hw;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        T* row = cols + ((ci * k + ky) * k + kx) * hw;
        const auto oy = static_cast<std::ptrdiff_t>(ky) - static_cast<std::ptrdiff_t>(pad);
        const auto ox = static_cast<std::ptrdiff_t>(kx) - static_cast<std::ptrdiff_t>(pad);
        for (std::size_t y = 0; y < h; ++y) {
          const auto sy = static_cast<std::ptrdiff_t>(y) + oy;
          T* dst = row + y * w;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) {
            std::fill(dst, dst + w, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(sy) * w;
          // Valid x range: 0 <= x + ox < w.
          const std::size_t x_begin = ox < 0 ? static_cast<std::size_t>(-ox) : 0;
          const std::size_t x_end = ox > 0 ? w - std::min(w, static_cast<std::size_t>(ox)) : w;
          std::fill(dst, dst + std::min(x_begin, w), T(0));
          for (std::size_t x = x_begin; x < x_end; ++x) dst[x] = src[static_cast<std::ptrdiff_t>(x) + ox];
          if (x_end < w) std::fill(dst + std::max(x_end, x_begin), dst + w, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, std::size_t channels, std::size_t h, std::size_t w, std::size_t k,
                std::size_t pad, T* dx) {
  const std::size_t hw = h * w;
  for (std::size_t ci = 0; ci < channels; ++ci) {
    T* plane = dx + ci * hw;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const T* row = cols + ((ci * k + ky) * k + kx) * hw;
        const auto oy = static_cast<std::ptrdiff_t>(ky) - static_cast<std::ptrdiff_t>(pad);
        const auto ox = static_cast<std::ptrdiff_t>(kx) - static_cast<std::ptrdiff_t>(pad);
        for (std::size_t y = 0; y < h; ++y) {
          const auto sy = static_cast<std::ptrdiff_t>(y) + oy;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          T* dst = plane + static_cast<std::size_t>(sy) * w;
          const T* src = row + y * w;
          const std::size_t x_begin = ox < 0 ? static_cast<std::size_t>(-ox) : 0;
          const std::size_t x_end = ox > 0 ? w - std::min(w, static_cast<std::size_t>(ox)) : w;
          for (std::size_t x = x_begin; x < x_end; ++x) dst[static_cast<std::ptrdiff_t>(x) + ox] += src[x];
        }
      }
    }
  }
}

template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& x, const ConvShape& s, const std::vector<T>& weight,
                          const std::vector<T>& bias) {
  if (x.c != s.in_channels || weight.size() != s.weight_count() || bias.size() != s.out_channels) {
    throw ValidationError("conv2d: channel/weight shape mismatch for input " + x.shape_string());
  }
  Tensor4<T> y(x.n, s.out_channels, x.h, x.w);
  const std::size_t hw = x.plane();
  std::vector<T> cols(s.patch() * hw);
  ConstMatrixMap<T> wm(weight.data(), static_cast<Eigen::Index>(s.out_channels),
                       static_cast<Eigen::Index>(s.patch()));
  for (std::size_t i = 0; i < x.n; ++i) {
    im2col(x.sample(i), x.c, x.h, x.w, s.kernel, s.pad_before(), cols.data());
    ConstMatrixMap<T> cm(cols.data(), static_cast<Eigen::Index>(s.patch()), static_cast<Eigen::Index>(hw));
    MatrixMap<T> ym(y.sample(i), static_cast<Eigen::Index>(s.out_channels), static_cast<Eigen::Index>(hw));
    ym.noalias() = wm * cm;
    for (std::size_t o = 0; o < s.out_channels; ++o) ym.row(static_cast<Eigen::Index>(o)).array() += bias[o];
  }
  return y;
}

// Accumulates into dweight/dbias; returns dx.
template <typename T>
Tensor4<T> conv2d_backward(const Tensor4<T>& x, const ConvShape& s, const std::vector<T>& weight,
                           const Tensor4<T>& dy, std::vector<T>& dweight, std::vector<T>& dbias) {
  Tensor4<T> dx(x.n, x.c, x.h, x.w);
  const std::size_t hw = x.plane();
  std::vector<T> cols(s.patch() * hw);
  std::vector<T> dcols(s.patch() * hw);
  ConstMatrixMap<T> wm(weight.data(), static_cast<Eigen::Index>(s.out_channels),
                       static_cast<Eigen::Index>(s.patch()));
  MatrixMap<T> dwm(dweight.data(), static_cast<Eigen::Index>(s.out_channels),
                   static_cast<Eigen::Index>(s.patch()));
  for (std::size_t i = 0; i < x.n; ++i) {
    im2col(x.sample(i), x.c, x.h, x.w, s.kernel, s.pad_before(), cols.data());
    ConstMatrixMap<T> cm(cols.data(), static_cast<Eigen::Index>(s.patch()), static_cast<Eigen::Index>(hw));
    ConstMatrixMap<T> dym(dy.sample(i), static_cast<Eigen::Index>(s.out_channels), static_cast<Eigen::Index>(hw));
    dwm.noalias() += dym * cm.transpose();
    // Scalar sum: Eigen's vectorized reduction order depends on the row's address alignment.
    for (std::size_t o = 0; o < s.out_channels; ++o) {
      const T* row = dy.sample(i) + o * hw;
      T acc = T(0);
      for (std::size_t k = 0; k < hw; ++k) acc += row[k];
      dbias[o] += acc;
    }
    MatrixMap<T> dcm(dcols.data(), static_cast<Eigen::Index>(s.patch()), static_cast<Eigen::Index>(hw));
    dcm.noalias() = wm.transpose() * dym;
    col2im_add(dcols.data(), x.c, x.h, x.w, s.kernel, s.pad_before(), dx.sample(i));
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Batch normalization over (N, H, W) per channel.

inline constexpr double kBnEpsilon = 1e-5;
inline constexpr double kBnMomentum = 0.9;

template <typename T>
struct BatchNormCache {
  Tensor4<T> x_hat;
  std::vector<double> inv_std;
};

template <typename T>
Tensor4<T> batch_norm_train(const Tensor4<T>& x, const std::vector<T>& gamma, const std::vector<T>& beta,
                            std::vector<T>& running_mean, std::vector<T>& running_var,
                            BatchNormCache<T>& cache, double eps = kBnEpsilon,
                            double momentum = kBnMomentum) {
  const std::size_t count = x.n * x.plane();
  if (count < 2) throw ValidationError("batch_norm: train mode needs at least 2 values per channel");
  if (gamma.size() != x.c || beta.size() != x.c) throw ValidationError("batch_norm: parameter shape mismatch");
  Tensor4<T> y(x.n, x.c, x.h, x.w);
  cache.x_hat = Tensor4<T>(x.n, x.c, x.h, x.w);
  cache.inv_std.assign(x.c, 0.0);
  const std::size_t hw = x.plane();
  for (std::size_t ch = 0; ch < x.c; ++ch) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) {
      const T* p = x.sample(i) + ch * hw;
      for (std::size_t k = 0; k < hw; ++k) sum += static_cast<double>(p[k]);
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) {
      const T* p = x.sample(i) + ch * hw;
      for (std::size_t k = 0; k < hw; ++k) {
        const double d = static_cast<double>(p[k]) - mean;
        ss += d * d;
      }
    }
    const double var = ss / static_cast<double>(count);
    const double inv = 1.0 / std::sqrt(var + eps);
    cache.inv_std[ch] = inv;
    const double g = static_cast<double>(gamma[ch]);
    const double b = static_cast<double>(beta[ch]);
    for (std::size_t i = 0; i < x.n; ++i) {
      const T* p = x.sample(i) + ch * hw;
      T* xh = cache.x_hat.sample(i) + ch * hw;
      T* q = y.sample(i) + ch * hw;
      for (std::size_t k = 0; k < hw; ++k) {
        const double v = (static_cast<double>(p[k]) - mean) * inv;
        xh[k] = static_cast<T>(v);
        q[k] = static_cast<T>(g * v + b);
      }
    }
    running_mean[ch] = static_cast<T>(momentum * static_cast<double>(running_mean[ch]) + (1.0 - momentum) * mean);
    running_var[ch] = static_cast<T>(momentum * static_cast<double>(running_var[ch]) + (1.0 - momentum) * var);
  }
  return y;
}

template <typename T>
Tensor4<T> batch_norm_infer(const Tensor4<T>& x, const std::vector<T>& gamma, const std::vector<T>& beta,
                            const std::vector<T>& running_mean, const std::vector<T>& running_var,
                            double eps = kBnEpsilon) {
  Tensor4<T> y(x.n, x.c, x.h, x.w);
  const std::size_t hw = x.plane();
  for (std::size_t ch = 0; ch < x.c; ++ch) {
    const double inv = 1.0 / std::sqrt(static_cast<double>(running_var[ch]) + eps);
    const double scale = static_cast<double>(gamma[ch]) * inv;
    const double shift = static_cast<double>(beta[ch]) - static_cast<double>(running_mean[ch]) * scale;
    for (std::size_t i = 0; i < x.n; ++i) {
      const T* p = x.sample(i) + ch * hw;
      T* q = y.sample(i) + ch * hw;
      for (std::size_t k = 0; k < hw; ++k) q[k] = static_cast<T>(static_cast<double>(p[k]) * scale + shift);
    }
  }
  return y;
}

template <typename T>
Tensor4<T> batch_norm_backward(const BatchNormCache<T>& cache, const std::vector<T>& gamma,
                               const Tensor4<T>& dy, std::vector<T>& dgamma, std::vector<T>& dbeta) {
  const auto& xh = cache.x_hat;
  Tensor4<T> dx(dy.n, dy.c, dy.h, dy.w);
  const std::size_t hw = dy.plane();
  const auto m = static_cast<double>(dy.n * hw);
  for (std::size_t ch = 0; ch < dy.c; ++ch) {
    double sum_dy = 0.0, sum_dy_xh = 0.0;
    for (std::size_t i = 0; i < dy.n; ++i) {
      const T* g = dy.sample(i) + ch * hw;
      const T* h = xh.sample(i) + ch * hw;
      for (std::size_t k = 0; k < hw; ++k) {
        sum_dy += static_cast<double>(g[k]);
        sum_dy_xh += static_cast<double>(g[k]) * static_cast<double>(h[k]);
      }
    }
    dgamma[ch] += static_cast<T>(sum_dy_xh);
    dbeta[ch] += static_cast<T>(sum_dy);
    const double scale = static_cast<double>(gamma[ch]) * cache.inv_std[ch] / m;
    for (std::size_t i = 0; i < dy.n; ++i) {
      const T* g = dy.sample(i) + ch * hw;
      const T* h = xh.sample(i) + ch * hw;
      T* d = dx.sample(i) + ch * hw;
      for (std::size_t k = 0; k < hw; ++k) {
        d[k] = static_cast<T>(scale * (m * static_cast<double>(g[k]) - sum_dy -
                                       static_cast<double>(h[k]) * sum_dy_xh));
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Activations

template <typename T>
Tensor4<T> relu_forward(const Tensor4<T>& x) {
  Tensor4<T> y = x;
  for (auto& v : y.data) v = v > T(0) ? v : T(0);
  return y;
}

// `y` is the forward output.
template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& y, const Tensor4<T>& dy) {
  Tensor4<T> dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(y.data[i] > T(0))) dx.data[i] = T(0);
  return dx;
}

template <typename T>
T sigmoid(T z) {
  // Split on sign so exp never overflows.
  if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
  const T e = std::exp(z);
  return e / (T(1) + e);
}

template <typename T>
Tensor4<T> sigmoid_forward(const Tensor4<T>& x) {
  Tensor4<T> y = x;
  for (auto& v : y.data) v = sigmoid(v);
  return y;
}

template <typename T>
Tensor4<T> sigmoid_backward(const Tensor4<T>& y, const Tensor4<T>& dy) {
  Tensor4<T> dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= y.data[i] * (T(1) - y.data[i]);
  return dx;
}

// ---------------------------------------------------------------------------
// 2x2 max pooling with argmax routing; nearest 2x upsampling; channel concatenation.

template <typename T>
Tensor4<T> maxpool2_forward(const Tensor4<T>& x, std::vector<std::uint32_t>& argmax) {
  if (x.h % 2 != 0 || x.w % 2 != 0) {
    throw ValidationError("maxpool2: odd spatial size " + x.shape_string());
  }
  Tensor4<T> y(x.n, x.c, x.h / 2, x.w / 2);
  argmax.assign(y.size(), 0);
  std::size_t o = 0;
  for (std::size_t i = 0; i < x.n; ++i) {
    for (std::size_t ch = 0; ch < x.c; ++ch) {
      const std::size_t base = (i * x.c + ch) * x.plane();
      for (std::size_t r = 0; r < y.h; ++r) {
        for (std::size_t c = 0; c < y.w; ++c, ++o) {
          std::size_t best = base + (2 * r) * x.w + 2 * c;
          for (std::size_t dr = 0; dr < 2; ++dr) {
            for (std::size_t dc = 0; dc < 2; ++dc) {
              const std::size_t idx = base + (2 * r + dr) * x.w + 2 * c + dc;
              if (x.data[idx] > x.data[best]) best = idx;
            }
          }
          y.data[o] = x.data[best];
          argmax[o] = static_cast<std::uint32_t>(best);
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor4<T> maxpool2_backward(const Tensor4<T>& x_shape, const std::vector<std::uint32_t>& argmax,
                             const Tensor4<T>& dy) {
  Tensor4<T> dx(x_shape.n, x_shape.c, x_shape.h, x_shape.w);
  for (std::size_t o = 0; o < dy.size(); ++o) dx.data[argmax[o]] += dy.data[o];
  return dx;
}

template <typename T>
Tensor4<T> upsample2_forward(const Tensor4<T>& x) {
  Tensor4<T> y(x.n, x.c, x.h * 2, x.w * 2);
  for (std::size_t p = 0; p < x.n * x.c; ++p) {
    const T* src = x.data.data() + p * x.plane();
    T* dst = y.data.data() + p * y.plane();
    for (std::size_t r = 0; r < y.h; ++r)
      for (std::size_t c = 0; c < y.w; ++c) dst[r * y.w + c] = src[(r / 2) * x.w + c / 2];
  }
  return y;
}

template <typename T>
Tensor4<T> upsample2_backward(const Tensor4<T>& dy) {
  Tensor4<T> dx(dy.n, dy.c, dy.h / 2, dy.w / 2);
  for (std::size_t p = 0; p < dy.n * dy.c; ++p) {
    const T* src = dy.data.data() + p * dy.plane();
    T* dst = dx.data.data() + p * dx.plane();
    for (std::size_t r = 0; r < dy.h; ++r)
      for (std::size_t c = 0; c < dy.w; ++c) dst[(r / 2) * dx.w + c / 2] += src[r * dy.w + c];
  }
  return dx;
}

template <typename T>
Tensor4<T> concat_channels(const Tensor4<T>& a, const Tensor4<T>& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w) {
    throw ValidationError("concat: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
  Tensor4<T> y(a.n, a.c + b.c, a.h, a.w);
  for (std::size_t i = 0; i < a.n; ++i) {
    std::copy(a.sample(i), a.sample(i) + a.sample_size(), y.sample(i));
    std::copy(b.sample(i), b.sample(i) + b.sample_size(), y.sample(i) + a.sample_size());
  }
  return y;
}

template <typename T>
void split_channels(const Tensor4<T>& dy, std::size_t first, Tensor4<T>& da, Tensor4<T>& db) {
  da = Tensor4<T>(dy.n, first, dy.h, dy.w);
  db = Tensor4<T>(dy.n, dy.c - first, dy.h, dy.w);
  for (std::size_t i = 0; i < dy.n; ++i) {
    std::copy(dy.sample(i), dy.sample(i) + da.sample_size(), da.sample(i));
    std::copy(dy.sample(i) + da.sample_size(), dy.sample(i) + dy.sample_size(), db.sample(i));
  }
}

// ---------------------------------------------------------------------------
// Metrics and losses on sigmoid outputs.

inline constexpr double kProbClamp = 1e-7;

// sum(p*t) / (sum p + sum t - sum(p*t)); 1 when both sums are zero.
template <typename T>
double soft_jaccard(const Tensor4<T>& pred, const Tensor4<T>& target) {
  require_same_shape(pred, target, "soft_jaccard");
  double inter = 0.0, sp = 0.0, st = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = pred.data[i], t = target.data[i];
    inter += p * t;
    sp += p;
    st += t;
  }
  if (sp == 0.0 && st == 0.0) return 1.0;
  return inter / (sp + st - inter);
}

// d soft_jaccard / d pred.
template <typename T>
Tensor4<T> soft_jaccard_grad(const Tensor4<T>& pred, const Tensor4<T>& target) {
  require_same_shape(pred, target, "soft_jaccard");
  double inter = 0.0, sp = 0.0, st = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += static_cast<double>(pred.data[i]) * target.data[i];
    sp += pred.data[i];
    st += target.data[i];
  }
  Tensor4<T> g(pred.n, pred.c, pred.h, pred.w);
  const double uni = sp + st - inter;
  if (uni <= 0.0) return g;
  const double inv2 = 1.0 / (uni * uni);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double t = target.data[i];
    g.data[i] = static_cast<T>((t * uni - inter * (1.0 - t)) * inv2);
  }
  return g;
}

// Mean binary cross-entropy with predictions clamped to [1e-7, 1-1e-7].
template <typename T>
double bce_loss(const Tensor4<T>& pred, const Tensor4<T>& target) {
  require_same_shape(pred, target, "bce_loss");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(static_cast<double>(pred.data[i]), kProbClamp, 1.0 - kProbClamp);
    const double t = target.data[i];
    acc -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  return pred.size() == 0 ? 0.0 : acc / static_cast<double>(pred.size());
}

// d bce / d pred, evaluated at the clamped prediction.
template <typename T>
Tensor4<T> bce_grad(const Tensor4<T>& pred, const Tensor4<T>& target) {
  require_same_shape(pred, target, "bce_loss");
  Tensor4<T> g(pred.n, pred.c, pred.h, pred.w);
  const double inv_n = 1.0 / static_cast<double>(std::max<std::size_t>(1, pred.size()));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(static_cast<double>(pred.data[i]), kProbClamp, 1.0 - kProbClamp);
    const double t = target.data[i];
    g.data[i] = static_cast<T>((p - t) / (p * (1.0 - p)) * inv_n);
  }
  return g;
}

struct LossValue {
  double total = 0.0;
  double bce = 0.0;
  double jaccard = 0.0;
};

// Training objective bce(p,t) + (1 - soft_jaccard(p,t)) with p = sigmoid(logits).
// Returns the gradient with respect to the logits; the BCE part uses the exact
// (p - t)/n form so saturated outputs still receive a signal.
template <typename T>
LossValue segmentation_loss(const Tensor4<T>& logits, const Tensor4<T>& target, Tensor4<T>& prob,
                            Tensor4<T>& dlogits) {
  require_same_shape(logits, target, "segmentation_loss");
  prob = sigmoid_forward(logits);
  LossValue v;
  v.bce = bce_loss(prob, target);
  v.jaccard = soft_jaccard(prob, target);
  v.total = v.bce + (1.0 - v.jaccard);
  const Tensor4<T> dj = soft_jaccard_grad(prob, target);
  dlogits = Tensor4<T>(logits.n, logits.c, logits.h, logits.w);
  const double inv_n = 1.0 / static_cast<double>(std::max<std::size_t>(1, logits.size()));
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = prob.data[i];
    const double t = target.data[i];
    dlogits.data[i] = static_cast<T>((p - t) * inv_n - static_cast<double>(dj.data[i]) * p * (1.0 - p));
  }
  return v;
}

}  // namespace fforge::nn
