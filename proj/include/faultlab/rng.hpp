// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "faultlab/tensor.hpp"

namespace faultlab {

std::uint64_t splitmix64_next(std::uint64_t& state);
std::uint64_t fnv1a64(std::string_view text);

/// xoshiro256** seeded through SplitMix64. Reference outputs are listed in
/// docs/FORMATS.md and pinned in tests/rng_test.cpp.
///
/// Instances are single-owner. Parallel work takes a child stream per task;
/// children depend only on (root seed, label), never on how far the parent
/// has advanced.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Stream for `label` under `seed`; equivalent to Rng(seed).child(label).
  static Rng derive(std::uint64_t seed, std::string_view label);

  Rng child(std::string_view label) const { return derive(seed_, label); }
  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  /// True with probability p. p <= 0 never fires, p >= 1 always fires.
  bool bernoulli(double p);
  /// Standard normal via Box-Muller (one value per two uniforms).
  double normal();

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
};

/// n i.i.d. N(mu, sigma^2) draws as a rank-1 tensor.
Tensor gaussian(Rng& rng, std::size_t n, float mu, float sigma);

}  // namespace faultlab
