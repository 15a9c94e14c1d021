// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

namespace faultlab {

/// Per-fault, per-metric sweep summary.
///
/// std uses the n-1 denominator (0 when n == 1). The interval is
/// mean +/- z * std / sqrt(n). `significant` means the baseline lies outside it.
/// With n == 0 (every trial failed or was non-finite) the numeric fields are NaN.
struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  std::size_t n = 0;
  double baseline = 0.0;
  bool significant = false;
  std::size_t n_nonfinite = 0;
  std::size_t n_errors = 0;

  friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

inline constexpr double kNormalZ95 = 1.96;

/// Mean is accumulated as offsets from the first value, so a constant sample
/// reproduces that value exactly and never flags itself against an equal baseline.
SummaryStats summarize(std::span<const double> values, double baseline, double z = kNormalZ95);

}  // namespace faultlab
