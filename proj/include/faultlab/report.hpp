// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "faultlab/runner.hpp"

namespace faultlab {

/// Plot-ready CSV for one metric:
///   fault,x,y,yerr_low,yerr_high,std,n,baseline
/// x is the layer index ("all" for whole-model faults), y the mean,
/// yerr_* the distance from the mean to the CI bounds. Throws InputError if
/// the metric was not recorded.
std::string emit_plot_csv(const ExperimentResult& result, const std::string& metric);

/// Markdown report: run echo, then one table per metric with a baseline row.
/// Rows whose CI excludes the baseline are marked with '*'.
std::string emit_markdown_summary(const ExperimentResult& result);

/// Markdown diff of b against a, matched by canonical fault spec: delta of
/// means and significance changes. Unmatched rows are listed. Throws
/// InputError when the two runs recorded different metric sets.
std::string compare(const ExperimentResult& a, const ExperimentResult& b);

}  // namespace faultlab
