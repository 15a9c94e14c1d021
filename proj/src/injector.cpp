// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "faultlab/injector.hpp"

namespace faultlab {

FaultInjector::FaultInjector(TransformerModel& model) : model_(model), baseline_hash_(model.parameter_hash()) {}

std::uint64_t FaultInjector::inject(const FaultSpec& spec, Rng& rng) {
  FaultReceipt receipt = apply_fault(model_, spec, rng);
  const std::uint64_t id = receipt.fault_id;
  receipts_.push_back(std::move(receipt));
  return id;
}

void FaultInjector::revert_all() {
  while (!receipts_.empty()) {
    revert(model_, receipts_.back());
    receipts_.pop_back();
  }
}

bool FaultInjector::verify_clean() const {
  return model_.hook_count() == 0 && model_.parameter_hash() == baseline_hash_;
}

}  // namespace faultlab
