// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "faultlab/fault_spec.hpp"
#include "faultlab/model.hpp"
#include "faultlab/rng.hpp"

namespace faultlab {

/// One parameter element touched by a weight fault.
struct ParamChange {
  std::string tensor;
  std::size_t index = 0;
  std::uint32_t before = 0;
  std::uint32_t after = 0;
  friend bool operator==(const ParamChange&, const ParamChange&) = default;
};

/// Exact-undo record for one applied fault. Move-only; revert() consumes it.
///
/// Weight faults carry a snapshot of every scoped tensor plus the list of
/// changed elements. Hook faults carry the installed hook ids and a digest of
/// the random pattern sampled at apply time.
class FaultReceipt {
 public:
  FaultReceipt() = default;
  FaultReceipt(FaultReceipt&&) noexcept = default;
  FaultReceipt& operator=(FaultReceipt&&) noexcept = default;
  FaultReceipt(const FaultReceipt&) = delete;
  FaultReceipt& operator=(const FaultReceipt&) = delete;

  std::uint64_t fault_id = 0;
  std::uint64_t model_id = 0;
  FaultSpec spec;
  std::uint64_t stream_seed = 0;
  std::optional<ParamSnapshot> snapshot;
  std::vector<HookId> hooks;
  std::vector<ParamChange> changes;
  std::string pattern_digest;
  /// Elements (weights, activations, mask entries or heads) the fault selected.
  std::size_t affected = 0;
  bool consumed = false;
};

FaultReceipt apply_bitflip(TransformerModel& model, const BitFlip& spec, Rng& rng);
FaultReceipt apply_weight_corruption(TransformerModel& model, const WeightCorruption& spec, Rng& rng);
FaultReceipt apply_activation_fault(TransformerModel& model, const ActivationFault& spec, Rng& rng);
FaultReceipt apply_attention_mask_fault(TransformerModel& model, const AttentionMaskFault& spec, Rng& rng);
FaultReceipt apply_head_dropout(TransformerModel& model, const HeadDropout& spec, Rng& rng);
FaultReceipt apply_layer_fault(TransformerModel& model, const LayerFault& spec, Rng& rng);

/// Dispatches on the variant. On any error the model is left untouched.
FaultReceipt apply_fault(TransformerModel& model, const FaultSpec& spec, Rng& rng);

/// Restores parameters and removes hooks. Throws RevertError for a receipt of
/// another model or one already reverted.
void revert(TransformerModel& model, FaultReceipt& receipt);

/// Names of the tensors a weight fault with this scope touches, sorted.
std::vector<std::string> scoped_param_names(const TransformerModel& model, const LayerScope& scope);

/// Population standard deviation of a tensor, in double.
double tensor_std(const Tensor& t);

}  // namespace faultlab
