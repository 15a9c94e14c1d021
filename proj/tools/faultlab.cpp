// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "faultlab/cli.hpp"

int main(int argc, char** argv) { return faultlab::cli::main(argc, argv, std::cout, std::cerr); }
