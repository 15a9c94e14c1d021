// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>

#include "kernel_rows.hpp"

namespace faultlab::kernels::omp {

using namespace detail;

// Loop indices are signed for OpenMP 2.x compatibility of `parallel for`.
using Index = std::int64_t;

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto [m, k, n] = check_matmul(a, b);
  Tensor out({m, n});
#pragma omp parallel
  {
    std::vector<double> acc;
#pragma omp for schedule(static)
    for (Index i = 0; i < static_cast<Index>(m); ++i) {
      matmul_row(a.raw() + i * k, b.raw(), nullptr, out.raw() + i * n, k, n, acc);
    }
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  const auto [rows, k, n] = check_linear(x, weight, bias);
  Shape shape = x.shape();
  shape.back() = n;
  Tensor out(shape);
#pragma omp parallel
  {
    std::vector<double> acc;
#pragma omp for schedule(static)
    for (Index i = 0; i < static_cast<Index>(rows); ++i) {
      matmul_row(x.raw() + i * k, weight.raw(), bias.raw(), out.raw() + i * n, k, n, acc);
    }
  }
  return out;
}

Tensor softmax_lastdim(const Tensor& x) {
  Tensor out(x.shape());
  const std::size_t n = x.last_dim();
  if (n == 0) return out;
  const auto rows = static_cast<Index>(x.numel() / n);
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < rows; ++r) softmax_row(x.raw() + r * n, out.raw() + r * n, n);
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps) {
  const std::size_t n = x.last_dim();
  if (gamma.numel() != n || beta.numel() != n) throw DimensionError("layer_norm: gamma/beta size mismatch");
  Tensor out(x.shape());
  if (n == 0) return out;
  const auto rows = static_cast<Index>(x.numel() / n);
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < rows; ++r) {
    layer_norm_row(x.raw() + r * n, gamma.raw(), beta.raw(), eps, out.raw() + r * n, n);
  }
  return out;
}

Tensor gelu(const Tensor& x) {
  Tensor out(x.shape());
  const auto n = static_cast<Index>(x.numel());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) out[i] = gelu_scalar(x[i]);
  return out;
}

Tensor head_scores(const Tensor& qkv, const HeadLayout& l, const Tensor& mask) {
  check_heads(qkv, l);
  if (mask.shape() != Shape{l.batch, l.seq, l.seq}) throw DimensionError("attention: mask shape mismatch");
  Tensor out({l.batch, l.n_heads, l.seq, l.seq});
  const auto rows = static_cast<Index>(l.batch * l.n_heads * l.seq);
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < rows; ++r) {
    const std::size_t i = r % l.seq;
    const std::size_t h = (r / l.seq) % l.n_heads;
    const std::size_t b = r / (l.seq * l.n_heads);
    scores_row(qkv, l, mask, b, h, i, out.raw() + r * l.seq);
  }
  return out;
}

Tensor head_context(const Tensor& probs, const Tensor& qkv, const HeadLayout& l) {
  check_heads(qkv, l);
  if (probs.shape() != Shape{l.batch, l.n_heads, l.seq, l.seq}) throw DimensionError("attention: probs shape mismatch");
  Tensor out({l.batch, l.n_heads, l.seq, l.head_dim});
  const auto rows = static_cast<Index>(l.batch * l.n_heads * l.seq);
#pragma omp parallel
  {
    std::vector<double> acc;
#pragma omp for schedule(static)
    for (Index r = 0; r < rows; ++r) {
      const std::size_t i = r % l.seq;
      const std::size_t h = (r / l.seq) % l.n_heads;
      const std::size_t b = r / (l.seq * l.n_heads);
      context_row(probs, qkv, l, b, h, i, out.raw() + r * l.head_dim, acc);
    }
  }
  return out;
}

}  // namespace faultlab::kernels::omp
