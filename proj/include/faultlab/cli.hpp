// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace faultlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitRuntime = 4;

/// Entry point of the `faultlab` tool: subcommands run, baseline, report,
/// list-faults and validate. Never throws; returns one of the exit codes above.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace faultlab::cli
