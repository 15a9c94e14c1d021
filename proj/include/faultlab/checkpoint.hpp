// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "faultlab/error.hpp"
#include "faultlab/model.hpp"

// Checkpoint container, version 1 (byte layout in docs/FORMATS.md):
//
//   [0, 8)      magic "FLCKPT01"
//   [8, 16)     header length H, uint64 little-endian
//   [16, 16+H)  UTF-8 JSON header: {"format", "version", "config", "tensors": [...]}
//   [16+H, ..)  payload; tensor offsets are relative to its start
//
// Tensor entries are {"name", "dtype": "f32", "shape", "offset", "length"}.
// Values are binary32 little-endian.

namespace faultlab {

inline constexpr char kCheckpointMagic[8] = {'F', 'L', 'C', 'K', 'P', 'T', '0', '1'};

struct Checkpoint {
  ModelConfig config;
  TensorMap tensors;
};

struct ValidationFinding {
  CheckpointErrorKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;
  bool ok() const { return findings.empty(); }
};

/// Throws CheckpointError; never returns a partially loaded map.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Tensors are laid out in name order with no padding, so equal inputs give
/// byte-identical files. Throws CheckpointError(kIo) on write failure.
void save_checkpoint(const TensorMap& tensors, const ModelConfig& config, const std::filesystem::path& path);

/// Header-level consistency check. Reads the magic and header, uses the file
/// size for bounds, and never reads the payload or modifies the file.
ValidationReport validate_checkpoint(const std::filesystem::path& path);

/// load_checkpoint followed by model construction.
TransformerModel load_model(const std::filesystem::path& path);

}  // namespace faultlab
