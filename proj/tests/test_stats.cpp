// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "faultlab/rng.hpp"
#include "faultlab/stats.hpp"

using namespace faultlab;

TEST(Summarize, KnownSample) {
  const std::vector<double> v = {1, 2, 3, 4};
  const SummaryStats s = summarize(v, 0.0);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.std, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(s.ci95_low, 2.5 - 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_NEAR(s.ci95_high, 2.5 + 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(s.n, 4u);
  EXPECT_TRUE(s.significant);
}

TEST(Summarize, ConstantSampleNeverSignificantAgainstItself) {
  for (double c : {0.1, 0.7766666666666666, 1.0, 5.545177444479562}) {
    const std::vector<double> v(30, c);
    const SummaryStats s = summarize(v, c);
    EXPECT_EQ(s.mean, c);
    EXPECT_EQ(s.std, 0.0);
    EXPECT_FALSE(s.significant);
  }
}

TEST(Summarize, SingleValueHasZeroStd) {
  const SummaryStats s = summarize(std::vector<double>{0.5}, 0.5);
  EXPECT_EQ(s.std, 0.0);
  EXPECT_EQ(s.ci95_low, 0.5);
  EXPECT_FALSE(s.significant);
}

TEST(Summarize, EmptySampleIsNan) {
  const SummaryStats s = summarize(std::vector<double>{}, 1.0);
  EXPECT_EQ(s.n, 0u);
  EXPECT_TRUE(std::isnan(s.mean));
  EXPECT_TRUE(std::isnan(s.ci95_low));
  EXPECT_FALSE(s.significant);
}

TEST(Summarize, CustomZWidensInterval) {
  const std::vector<double> v = {0.9, 0.95, 1.0, 0.85};
  const SummaryStats narrow = summarize(v, 0.98, 1.0);
  const SummaryStats wide = summarize(v, 0.98, 3.0);
  EXPECT_LT(wide.ci95_low, narrow.ci95_low);
  EXPECT_GT(wide.ci95_high, narrow.ci95_high);
}

TEST(Summarize, AgreesWithTwoPassOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(40);
    std::vector<double> v(n);
    for (auto& x : v) x = 0.5 + 0.1 * rng.normal();
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const SummaryStats s = summarize(v, 0.5);
    ASSERT_NEAR(s.mean, m, 1e-12);
    ASSERT_NEAR(s.std, sd, 1e-12);
    ASSERT_NEAR(s.ci95_low, m - 1.96 * sd / std::sqrt(static_cast<double>(n)), 1e-12);
    ASSERT_EQ(s.significant, 0.5 < s.ci95_low || 0.5 > s.ci95_high);
  }
}
