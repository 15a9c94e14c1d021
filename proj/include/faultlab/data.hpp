// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "faultlab/model.hpp"
#include "faultlab/tokenizer.hpp"

namespace faultlab {

struct ClassificationRecord {
  std::string text;
  std::int32_t label = 0;
  friend bool operator==(const ClassificationRecord&, const ClassificationRecord&) = default;
};

struct ClassificationDataset {
  std::vector<ClassificationRecord> records;
  std::size_t size() const { return records.size(); }
};

struct LMDataset {
  std::vector<std::vector<std::int32_t>> sequences;
  /// Blank lines skipped plus lines dropped for tokenizing to fewer than 2 tokens.
  std::size_t warnings = 0;
  std::size_t size() const { return sequences.size(); }
};

/// `.jsonl` ({"text": str, "label": int} per line) or `.csv` (header
/// `text,label`, RFC 4180 quoting). Records keep file order. Throws DataError
/// carrying the 1-based line of the bad record.
ClassificationDataset load_classification(const std::filesystem::path& path);

/// First `max_lines` lines that are nonempty after trimming, tokenized and
/// truncated to `max_tokens`.
LMDataset load_lm_lines(const std::filesystem::path& path, const Tokenizer& tokenizer, std::size_t max_tokens,
                        std::size_t max_lines);

/// `n` records drawn without replacement, in draw order, from a stream keyed by `seed`.
ClassificationDataset subset(const ClassificationDataset& data, std::size_t n, std::uint64_t seed);
LMDataset subset(const LMDataset& data, std::size_t n, std::uint64_t seed);

/// Indices used by subset(): partial Fisher-Yates over [0, size).
std::vector<std::size_t> subset_indices(std::size_t size, std::size_t n, std::uint64_t seed);

struct EvalBatch {
  TokenBatch tokens;
  std::vector<std::int32_t> labels;  // classification only
};

enum class Task { kClassify, kLm };

const char* to_string(Task task);
Task task_from_string(const std::string& text);

/// Batched evaluation data. Batches are contiguous in dataset order, the last
/// one may be partial.
struct EvalSet {
  Task task = Task::kClassify;
  std::vector<EvalBatch> batches;
  std::size_t examples() const;
};

/// Token sequences are truncated to `max_tokens` and right-padded with the
/// tokenizer's pad id; padded keys are masked out of attention.
EvalSet batch(const ClassificationDataset& data, const Tokenizer& tokenizer, std::size_t batch_size,
              std::size_t max_tokens);
EvalSet batch(const LMDataset& data, std::size_t batch_size, std::int32_t pad_id);

}  // namespace faultlab
