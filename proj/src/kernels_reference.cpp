// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "kernel_rows.hpp"

namespace faultlab::kernels::reference {

using namespace detail;

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto [m, k, n] = check_matmul(a, b);
  Tensor out({m, n});
  std::vector<double> acc;
  for (std::size_t i = 0; i < m; ++i) {
    matmul_row(a.raw() + i * k, b.raw(), nullptr, out.raw() + i * n, k, n, acc);
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  const auto [rows, k, n] = check_linear(x, weight, bias);
  Shape shape = x.shape();
  shape.back() = n;
  Tensor out(shape);
  std::vector<double> acc;
  for (std::size_t i = 0; i < rows; ++i) {
    matmul_row(x.raw() + i * k, weight.raw(), bias.raw(), out.raw() + i * n, k, n, acc);
  }
  return out;
}

Tensor softmax_lastdim(const Tensor& x) {
  Tensor out(x.shape());
  const std::size_t n = x.last_dim();
  if (n == 0) return out;
  for (std::size_t r = 0; r < x.numel() / n; ++r) softmax_row(x.raw() + r * n, out.raw() + r * n, n);
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps) {
  const std::size_t n = x.last_dim();
  if (gamma.numel() != n || beta.numel() != n) throw DimensionError("layer_norm: gamma/beta size mismatch");
  Tensor out(x.shape());
  if (n == 0) return out;
  for (std::size_t r = 0; r < x.numel() / n; ++r) {
    layer_norm_row(x.raw() + r * n, gamma.raw(), beta.raw(), eps, out.raw() + r * n, n);
  }
  return out;
}

Tensor gelu(const Tensor& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) out[i] = gelu_scalar(x[i]);
  return out;
}

Tensor head_scores(const Tensor& qkv, const HeadLayout& l, const Tensor& mask) {
  check_heads(qkv, l);
  if (mask.shape() != Shape{l.batch, l.seq, l.seq}) throw DimensionError("attention: mask shape mismatch");
  Tensor out({l.batch, l.n_heads, l.seq, l.seq});
  for (std::size_t b = 0; b < l.batch; ++b)
    for (std::size_t h = 0; h < l.n_heads; ++h)
      for (std::size_t i = 0; i < l.seq; ++i)
        scores_row(qkv, l, mask, b, h, i, out.raw() + ((b * l.n_heads + h) * l.seq + i) * l.seq);
  return out;
}

Tensor head_context(const Tensor& probs, const Tensor& qkv, const HeadLayout& l) {
  check_heads(qkv, l);
  if (probs.shape() != Shape{l.batch, l.n_heads, l.seq, l.seq}) throw DimensionError("attention: probs shape mismatch");
  Tensor out({l.batch, l.n_heads, l.seq, l.head_dim});
  std::vector<double> acc;
  for (std::size_t b = 0; b < l.batch; ++b)
    for (std::size_t h = 0; h < l.n_heads; ++h)
      for (std::size_t i = 0; i < l.seq; ++i)
        context_row(probs, qkv, l, b, h, i, out.raw() + ((b * l.n_heads + h) * l.seq + i) * l.head_dim, acc);
  return out;
}

}  // namespace faultlab::kernels::reference
