// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

// Per-row kernel bodies shared by the serial and OpenMP builds.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "faultlab/error.hpp"
#include "faultlab/kernels.hpp"
#include "faultlab/tensor.hpp"

namespace faultlab::kernels::detail {

struct MatmulDims {
  std::size_t m, k, n;
};

inline MatmulDims check_matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: cannot multiply " + shape_to_string(a.shape()) + " by " +
                         shape_to_string(b.shape()));
  }
  return {a.dim(0), a.dim(1), b.dim(1)};
}

inline MatmulDims check_linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
  if (w.rank() != 2 || x.last_dim() != w.dim(0) || bias.numel() != w.dim(1)) {
    throw DimensionError("linear: input " + shape_to_string(x.shape()) + ", weight " +
                         shape_to_string(w.shape()) + ", bias " + shape_to_string(bias.shape()));
  }
  return {x.numel() / x.last_dim(), w.dim(0), w.dim(1)};
}

// out[j] = init[j] + sum_t a[t] * b[t][j]; `acc` is n doubles of scratch.
inline void matmul_row(const float* a, const float* b, const float* init, float* out, std::size_t k,
                       std::size_t n, std::vector<double>& acc) {
  acc.assign(n, 0.0);
  if (init) {
    for (std::size_t j = 0; j < n; ++j) acc[j] = init[j];
  }
  for (std::size_t t = 0; t < k; ++t) {
    const double av = a[t];
    const float* brow = b + t * n;
    for (std::size_t j = 0; j < n; ++j) acc[j] += av * brow[j];
  }
  for (std::size_t j = 0; j < n; ++j) out[j] = static_cast<float>(acc[j]);
}

inline void softmax_row(const float* x, float* out, std::size_t n) {
  float mx = -std::numeric_limits<float>::infinity();
  for (std::size_t j = 0; j < n; ++j) mx = std::fmax(mx, x[j]);
  if (mx == -std::numeric_limits<float>::infinity()) {
    for (std::size_t j = 0; j < n; ++j) out[j] = 1.0f / static_cast<float>(n);
    return;
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double e = std::exp(static_cast<double>(x[j]) - mx);
    out[j] = static_cast<float>(e);
    sum += e;
  }
  for (std::size_t j = 0; j < n; ++j) out[j] = static_cast<float>(out[j] / sum);
}

inline void layer_norm_row(const float* x, const float* gamma, const float* beta, float eps, float* out,
                           std::size_t n) {
  double mean = 0.0;
  for (std::size_t j = 0; j < n; ++j) mean += x[j];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = x[j] - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  const double inv = 1.0 / std::sqrt(var + eps);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = static_cast<float>((x[j] - mean) * inv * gamma[j] + beta[j]);
  }
}

inline float gelu_scalar(float x) {
  const double v = x;
  const double c = std::sqrt(2.0 / std::numbers::pi);
  return static_cast<float>(0.5 * v * (1.0 + std::tanh(c * (v + 0.044715 * v * v * v))));
}

inline void check_heads(const Tensor& qkv, const HeadLayout& l) {
  if (qkv.numel() != l.batch * l.seq * 3 * l.d_model() || qkv.last_dim() != 3 * l.d_model()) {
    throw DimensionError("attention: qkv shape " + shape_to_string(qkv.shape()) +
                         " does not match layout");
  }
}

// One (b, h, i) query row of scores.
inline void scores_row(const Tensor& qkv, const HeadLayout& l, const Tensor& mask, std::size_t b,
                       std::size_t h, std::size_t i, float* out) {
  const std::size_t d = l.d_model();
  const std::size_t stride = 3 * d;
  const double scale = 1.0 / std::sqrt(static_cast<double>(l.head_dim));
  const float* q = qkv.raw() + (b * l.seq + i) * stride + h * l.head_dim;
  const float* mrow = mask.raw() + (b * l.seq + i) * l.seq;
  for (std::size_t j = 0; j < l.seq; ++j) {
    const float* kv = qkv.raw() + (b * l.seq + j) * stride + d + h * l.head_dim;
    double dot = 0.0;
    for (std::size_t t = 0; t < l.head_dim; ++t) dot += static_cast<double>(q[t]) * kv[t];
    out[j] = static_cast<float>(dot * scale + mrow[j]);
  }
}

inline void context_row(const Tensor& probs, const Tensor& qkv, const HeadLayout& l, std::size_t b,
                        std::size_t h, std::size_t i, float* out, std::vector<double>& acc) {
  const std::size_t d = l.d_model();
  const std::size_t stride = 3 * d;
  const float* p = probs.raw() + ((b * l.n_heads + h) * l.seq + i) * l.seq;
  acc.assign(l.head_dim, 0.0);
  for (std::size_t j = 0; j < l.seq; ++j) {
    const double pj = p[j];
    const float* v = qkv.raw() + (b * l.seq + j) * stride + 2 * d + h * l.head_dim;
    for (std::size_t t = 0; t < l.head_dim; ++t) acc[t] += pj * v[t];
  }
  for (std::size_t t = 0; t < l.head_dim; ++t) out[t] = static_cast<float>(acc[t]);
}

}  // namespace faultlab::kernels::detail
