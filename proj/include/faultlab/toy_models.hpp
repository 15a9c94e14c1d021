// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "faultlab/data.hpp"
#include "faultlab/model.hpp"

// Small deterministic models and fixture generators for tests, benchmarks and
// the bundled fixtures.

namespace faultlab::toy {

/// Every canonical tensor filled with zeros; LayerNorm gains included.
TensorMap zero_params(const ModelConfig& config);

/// N(0, scale^2) weights and wte/wpe, N(0, (scale/4)^2) biases, LayerNorm
/// gains 1 + N(0, 0.1^2) and biases N(0, 0.1^2). Same seed, same bytes.
TransformerModel random_model(const ModelConfig& config, std::uint64_t seed, float scale = 0.3f);

/// 2 layers, 2 heads, d_model 16, d_ff 32, byte vocab (258), max_seq_len 32.
ModelConfig small_lm_config(std::size_t n_layers = 2);
/// small_lm_config() as a 2-class classifier.
ModelConfig small_classifier_config(std::size_t n_layers = 2);

/// Every parameter zero, so all logits are 0 and log-perplexity is ln(vocab).
TransformerModel uniform_lm(std::size_t vocab = 256, std::size_t max_seq_len = 32);

/// Hand-wired 10-layer byte-level sentiment classifier. Layer 0 averages a
/// per-byte score ('o' = +1, 'a' = -1) over the sequence into position 0;
/// layers 1..9 are small random blocks. Class 1 wins when 'o' outnumbers 'a'.
TransformerModel sentiment_classifier(std::uint64_t seed = 7, std::size_t n_layers = 10);

/// Short synthetic reviews labelled by the sign of (#'o' - #'a'); every text
/// fits in 32 bytes and no text ties.
ClassificationDataset review_fixture(std::size_t n = 200, std::uint64_t seed = 1);

/// Plain-text LM lines with a few blank lines interleaved.
std::vector<std::string> lm_fixture_lines();

}  // namespace faultlab::toy
