// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "faultlab/faults.hpp"

namespace faultlab {

/// Central entry point for applying and rolling back faults on one model.
///
/// The baseline parameter hash is taken at construction. The injector holds
/// a reference; the model must outlive it and must not be mutated behind its
/// back while faults are active.
class FaultInjector {
 public:
  explicit FaultInjector(TransformerModel& model);

  /// Applies `spec` and returns the receipt's fault id. On error nothing is applied.
  std::uint64_t inject(const FaultSpec& spec, Rng& rng);
  /// Reverts every active fault, newest first.
  void revert_all();
  /// Parameters hash to the baseline and no hooks are installed.
  bool verify_clean() const;

  const std::string& baseline_hash() const { return baseline_hash_; }
  const std::vector<FaultReceipt>& active() const { return receipts_; }
  TransformerModel& model() { return model_; }
  const TransformerModel& model() const { return model_; }

 private:
  TransformerModel& model_;
  std::string baseline_hash_;
  std::vector<FaultReceipt> receipts_;
};

}  // namespace faultlab
