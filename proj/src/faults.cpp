// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "faultlab/faults.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>

#include "faultlab/error.hpp"
#include "faultlab/hash.hpp"

namespace faultlab {

namespace {

std::atomic<std::uint64_t> g_next_fault_id{1};

constexpr unsigned kMantissaBits = 23;
constexpr float kMaskFloor = -1e8f;

FaultReceipt new_receipt(const TransformerModel& model, FaultSpec spec, const Rng& rng) {
  FaultReceipt r;
  r.fault_id = g_next_fault_id++;
  r.model_id = model.id();
  r.spec = std::move(spec);
  r.stream_seed = rng.seed();
  return r;
}

template <class T>
std::string digest_of(const std::vector<T>& values) {
  Sha256 h;
  h.update(values.data(), values.size() * sizeof(T));
  return h.hex_digest();
}

void require_hook_free(const TransformerModel& model, const HookSite& site) {
  if (site.layer >= model.config().n_layers) {
    throw TargetingError("layer " + std::to_string(site.layer) + " out of range (model has " +
                         std::to_string(model.config().n_layers) + " layers)");
  }
  if (model.has_hook(site)) throw ConflictError("hook site " + site.to_string() + " already has a fault");
}

// Static per-(position, channel) pattern for the block output; positions past
// the batch's sequence length are simply unused.
std::size_t output_pattern_size(const ModelConfig& c) { return c.max_seq_len * c.d_model; }

}  // namespace

double tensor_std(const Tensor& t) {
  if (t.numel() == 0) return 0.0;
  double mean = 0.0;
  for (float v : t.data()) mean += v;
  mean /= static_cast<double>(t.numel());
  double var = 0.0;
  for (float v : t.data()) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(t.numel()));
}

std::vector<std::string> scoped_param_names(const TransformerModel& model, const LayerScope& scope) {
  const std::size_t n = model.config().n_layers;
  if (scope && *scope >= n) {
    throw TargetingError("layer " + std::to_string(*scope) + " out of range (model has " + std::to_string(n) +
                         " layers)");
  }
  std::vector<std::string> names;
  for (const auto& handle : model.layers()) {
    if (scope && handle.index != *scope) continue;
    names.insert(names.end(), handle.param_names.begin(), handle.param_names.end());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw TargetingError("fault scope matched no parameters");
  return names;
}

FaultReceipt apply_bitflip(TransformerModel& model, const BitFlip& spec, Rng& rng) {
  validate_fault_spec(spec, model.config());
  const auto names = scoped_param_names(model, spec.layer);
  FaultReceipt r = new_receipt(model, spec, rng);
  r.snapshot = ParamSnapshot{model.id(), {}};
  for (const auto& name : names) r.snapshot->tensors.emplace(name, model.param(name));

  for (const auto& name : names) {
    Tensor& t = model.mutable_param(name);
    for (std::size_t i = 0; i < t.numel(); ++i) {
      if (!rng.bernoulli(spec.severity)) continue;
      const auto bit = static_cast<unsigned>(rng.uniform_index(kMantissaBits));
      const std::uint32_t before = float_bits(t[i]);
      const std::uint32_t after = before ^ (1u << bit);
      t[i] = bits_float(after);
      r.changes.push_back({name, i, before, after});
    }
  }
  r.affected = r.changes.size();
  return r;
}

FaultReceipt apply_weight_corruption(TransformerModel& model, const WeightCorruption& spec, Rng& rng) {
  validate_fault_spec(spec, model.config());
  const auto names = scoped_param_names(model, spec.layer);
  FaultReceipt r = new_receipt(model, spec, rng);
  r.snapshot = ParamSnapshot{model.id(), {}};
  for (const auto& name : names) r.snapshot->tensors.emplace(name, model.param(name));

  for (const auto& name : names) {
    Tensor& t = model.mutable_param(name);
    const double sigma = spec.sigma_mode == SigmaMode::kTensorStd ? tensor_std(t) : spec.sigma;
    for (std::size_t i = 0; i < t.numel(); ++i) {
      if (!rng.bernoulli(spec.rate)) continue;
      ++r.affected;
      const double delta = sigma * rng.normal();
      if (delta == 0.0) continue;
      const std::uint32_t before = float_bits(t[i]);
      t[i] = static_cast<float>(t[i] + delta);
      r.changes.push_back({name, i, before, float_bits(t[i])});
    }
  }
  return r;
}

FaultReceipt apply_activation_fault(TransformerModel& model, const ActivationFault& spec, Rng& rng) {
  validate_fault_params(spec);
  const HookSite site{HookKind::kLayerOutput, spec.layer};
  require_hook_free(model, site);
  FaultReceipt r = new_receipt(model, spec, rng);
  const std::size_t D = model.config().d_model;
  const std::size_t n = output_pattern_size(model.config());

  HookFn fn;
  switch (spec.kind) {
    case ActivationKind::kZero: {
      auto drop = std::make_shared<std::vector<std::uint8_t>>(n, 0);
      for (auto& d : *drop) {
        d = rng.bernoulli(spec.severity) ? 1 : 0;
        r.affected += d;
      }
      r.pattern_digest = digest_of(*drop);
      fn = [drop, D](Tensor& x) {
        const std::size_t T = x.dim(1);
        for (std::size_t b = 0; b < x.dim(0); ++b)
          for (std::size_t k = 0; k < T * D; ++k)
            if ((*drop)[k]) x[b * T * D + k] = 0.0f;
      };
      break;
    }
    case ActivationKind::kNoise: {
      auto noise = std::make_shared<std::vector<float>>(n, 0.0f);
      for (auto& v : *noise) {
        if (rng.bernoulli(spec.severity)) {
          ++r.affected;
          v = static_cast<float>(spec.sigma * rng.normal());
        }
      }
      r.pattern_digest = digest_of(*noise);
      fn = [noise, D](Tensor& x) {
        const std::size_t T = x.dim(1);
        for (std::size_t b = 0; b < x.dim(0); ++b)
          for (std::size_t k = 0; k < T * D; ++k)
            if ((*noise)[k] != 0.0f) x[b * T * D + k] += (*noise)[k];
      };
      break;
    }
    case ActivationKind::kClamp: {
      if (spec.severity == 0.0) {
        fn = [](Tensor&) {};
        break;
      }
      const auto bound = static_cast<float>(spec.bound * (1.0 - spec.severity));
      r.affected = n;
      fn = [bound](Tensor& x) {
        for (auto& v : x.data()) {
          if (v > bound) v = bound;
          else if (v < -bound) v = -bound;
        }
      };
      break;
    }
  }
  r.hooks.push_back(model.install_hook(site, std::move(fn)));
  return r;
}

FaultReceipt apply_attention_mask_fault(TransformerModel& model, const AttentionMaskFault& spec, Rng& rng) {
  validate_fault_params(spec);
  const HookSite site{HookKind::kMask, spec.layer};
  require_hook_free(model, site);
  FaultReceipt r = new_receipt(model, spec, rng);
  const std::size_t L = model.config().max_seq_len;
  auto noise = std::make_shared<std::vector<float>>(L * L, 0.0f);
  if (spec.severity > 0.0) {
    for (auto& v : *noise) v = static_cast<float>(spec.severity * rng.normal());
    r.affected = noise->size();
  }
  r.pattern_digest = digest_of(*noise);
  r.hooks.push_back(model.install_hook(site, [noise, L](Tensor& mask) {
    const std::size_t T = mask.dim(1);
    for (std::size_t b = 0; b < mask.dim(0); ++b)
      for (std::size_t i = 0; i < T; ++i)
        for (std::size_t j = 0; j < T; ++j) {
          const float n = (*noise)[i * L + j];
          if (n == 0.0f) continue;
          float& m = mask[(b * T + i) * T + j];
          if (m == 0.0f) {
            m = n;
          } else {
            m = std::min(m + n, kMaskFloor);
          }
        }
  }));
  return r;
}

FaultReceipt apply_head_dropout(TransformerModel& model, const HeadDropout& spec, Rng& rng) {
  validate_fault_params(spec);
  const HookSite site{HookKind::kAttnHeadOutput, spec.layer};
  require_hook_free(model, site);
  FaultReceipt r = new_receipt(model, spec, rng);
  auto drop = std::make_shared<std::vector<std::uint8_t>>(model.config().n_heads, 0);
  for (auto& d : *drop) {
    d = rng.bernoulli(spec.severity) ? 1 : 0;
    r.affected += d;
  }
  r.pattern_digest = digest_of(*drop);
  r.hooks.push_back(model.install_hook(site, [drop](Tensor& ctx) {
    const std::size_t B = ctx.dim(0), H = ctx.dim(1), per_head = ctx.dim(2) * ctx.dim(3);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t h = 0; h < H; ++h)
        if ((*drop)[h]) std::fill_n(ctx.raw() + (b * H + h) * per_head, per_head, 0.0f);
  }));
  return r;
}

FaultReceipt apply_layer_fault(TransformerModel& model, const LayerFault& spec, Rng& rng) {
  validate_fault_params(spec);
  const HookSite site{HookKind::kLayerOutput, spec.layer};
  require_hook_free(model, site);
  FaultReceipt r = new_receipt(model, spec, rng);
  const std::size_t D = model.config().d_model;
  auto drop = std::make_shared<std::vector<std::uint8_t>>(output_pattern_size(model.config()), 0);
  for (auto& d : *drop) {
    d = rng.bernoulli(spec.severity) ? 1 : 0;
    r.affected += d;
  }
  r.pattern_digest = digest_of(*drop);
  // severity 1 zeroes everything with no rescale; severity 0 keeps scale exactly 1.
  const float scale = spec.severity >= 1.0 ? 0.0f : static_cast<float>(1.0 / (1.0 - spec.severity));
  r.hooks.push_back(model.install_hook(site, [drop, D, scale](Tensor& x) {
    const std::size_t T = x.dim(1);
    for (std::size_t b = 0; b < x.dim(0); ++b)
      for (std::size_t k = 0; k < T * D; ++k) {
        float& v = x[b * T * D + k];
        v = (*drop)[k] ? 0.0f : v * scale;
      }
  }));
  return r;
}

FaultReceipt apply_fault(TransformerModel& model, const FaultSpec& spec, Rng& rng) {
  return std::visit(
      [&](const auto& f) -> FaultReceipt {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, BitFlip>) return apply_bitflip(model, f, rng);
        else if constexpr (std::is_same_v<T, WeightCorruption>) return apply_weight_corruption(model, f, rng);
        else if constexpr (std::is_same_v<T, ActivationFault>) return apply_activation_fault(model, f, rng);
        else if constexpr (std::is_same_v<T, AttentionMaskFault>) return apply_attention_mask_fault(model, f, rng);
        else if constexpr (std::is_same_v<T, HeadDropout>) return apply_head_dropout(model, f, rng);
        else return apply_layer_fault(model, f, rng);
      },
      spec);
}

void revert(TransformerModel& model, FaultReceipt& receipt) {
  if (receipt.model_id != model.id()) {
    throw RevertError(RevertErrorKind::kForeign, "fault receipt belongs to model " + std::to_string(receipt.model_id) +
                                                     ", not " + std::to_string(model.id()));
  }
  if (receipt.consumed) {
    throw RevertError(RevertErrorKind::kDoubleRevert,
                      "fault " + std::to_string(receipt.fault_id) + " was already reverted");
  }
  if (receipt.snapshot) model.restore_params(*receipt.snapshot);
  for (HookId id : receipt.hooks) {
    if (!model.remove_hook(id)) {
      throw RevertError(RevertErrorKind::kForeign, "hook " + std::to_string(id) + " is no longer installed");
    }
  }
  receipt.consumed = true;
}

}  // namespace faultlab
