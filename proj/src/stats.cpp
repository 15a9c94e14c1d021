// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "faultlab/stats.hpp"

#include <cmath>
#include <limits>

namespace faultlab {

SummaryStats summarize(std::span<const double> values, double baseline, double z) {
  SummaryStats s;
  s.baseline = baseline;
  s.n = values.size();
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean = s.std = s.ci95_low = s.ci95_high = nan;
    return s;
  }
  const double first = values[0];
  double offset = 0.0;
  for (double v : values) offset += v - first;
  s.mean = first + offset / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  const double half = z * s.std / std::sqrt(static_cast<double>(s.n));
  s.ci95_low = s.mean - half;
  s.ci95_high = s.mean + half;
  s.significant = baseline < s.ci95_low || baseline > s.ci95_high;
  return s;
}

}  // namespace faultlab
