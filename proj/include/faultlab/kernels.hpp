// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "faultlab/tensor.hpp"

// Dense kernels used by the forward pass. Two builds of each kernel exist:
// `kernels::reference` runs serially, `kernels::omp` splits the outer loop
// across OpenMP threads. Both call the same per-row routine, so their
// outputs are bitwise identical for any thread count. The unqualified
// functions in `faultlab` forward to the OpenMP build.

namespace faultlab {

/// Geometry of a fused [batch*seq, 3*d_model] QKV activation.
struct HeadLayout {
  std::size_t batch = 0;
  std::size_t seq = 0;
  std::size_t n_heads = 0;
  std::size_t head_dim = 0;
  std::size_t d_model() const { return n_heads * head_dim; }
};

namespace kernels {

#define FAULTLAB_KERNEL_DECLS                                                               \
  Tensor matmul(const Tensor& a, const Tensor& b);                                          \
  Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);                 \
  Tensor softmax_lastdim(const Tensor& x);                                                  \
  Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps);   \
  Tensor gelu(const Tensor& x);                                                             \
  Tensor head_scores(const Tensor& qkv, const HeadLayout& layout, const Tensor& mask);      \
  Tensor head_context(const Tensor& probs, const Tensor& qkv, const HeadLayout& layout);

namespace reference {
FAULTLAB_KERNEL_DECLS
}  // namespace reference

namespace omp {
FAULTLAB_KERNEL_DECLS
}  // namespace omp

#undef FAULTLAB_KERNEL_DECLS

}  // namespace kernels

/// c[i][j] = sum_t a[i][t] * b[t][j], accumulated in double.
inline Tensor matmul(const Tensor& a, const Tensor& b) { return kernels::omp::matmul(a, b); }

/// x[rows x in] * weight[in x out] + bias[out].
inline Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return kernels::omp::linear(x, weight, bias);
}

/// Max-subtracted softmax over the last dimension. A slice whose maximum is
/// -inf (every entry -inf) becomes uniform.
inline Tensor softmax_lastdim(const Tensor& x) { return kernels::omp::softmax_lastdim(x); }

/// (x - mean) / sqrt(var + eps) * gamma + beta per last-dim slice, population variance.
inline Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps) {
  return kernels::omp::layer_norm(x, gamma, beta, eps);
}

/// Tanh-approximation GELU.
inline Tensor gelu(const Tensor& x) { return kernels::omp::gelu(x); }

/// scores[b,h,i,j] = q_i . k_j / sqrt(head_dim) + mask[b,i,j].
/// qkv is [batch*seq, 3*d_model], mask is [batch, seq, seq]; result [batch, heads, seq, seq].
inline Tensor head_scores(const Tensor& qkv, const HeadLayout& layout, const Tensor& mask) {
  return kernels::omp::head_scores(qkv, layout, mask);
}

/// ctx[b,h,i,:] = sum_j probs[b,h,i,j] * v_j; result [batch, heads, seq, head_dim].
inline Tensor head_context(const Tensor& probs, const Tensor& qkv, const HeadLayout& layout) {
  return kernels::omp::head_context(probs, qkv, layout);
}

}  // namespace faultlab
