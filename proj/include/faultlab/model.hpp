// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "faultlab/tensor.hpp"

namespace faultlab {

enum class Arch { kCausalLm, kClassifier };

const char* to_string(Arch arch);
Arch arch_from_string(const std::string& text);

struct ModelConfig {
  Arch arch = Arch::kCausalLm;
  std::size_t n_layers = 1;
  std::size_t n_heads = 1;
  std::size_t d_model = 8;
  std::size_t d_ff = 32;
  std::size_t vocab_size = 258;
  std::size_t max_seq_len = 64;
  std::size_t n_classes = 0;  // classifier only
  float layer_norm_eps = 1e-5f;

  std::size_t head_dim() const { return d_model / n_heads; }
  /// Throws InputError on a config that violates its invariants.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// Sorted by name, which is also the order used for hashing.
using TensorMap = std::map<std::string, Tensor>;

/// Every canonical parameter path with the shape the config implies.
std::map<std::string, Shape> canonical_shapes(const ModelConfig& config);

/// Parameter names belonging to block `layer` ("layers.{layer}." prefix).
std::vector<std::string> layer_param_names(std::size_t layer);

struct LayerHandle {
  std::size_t index = 0;
  std::string prefix;  // "layers.{i}."
  std::vector<std::string> param_names;
};

/// Scans "layers.{i}." prefixes of `params` and returns one handle per index.
/// Throws StructureError when an index below config.n_layers is missing, or
/// when indices are not contiguous.
std::vector<LayerHandle> resolve_layers(const TensorMap& params, const ModelConfig& config);

enum class HookKind { kLayerOutput, kAttnScores, kAttnHeadOutput, kMask };

/// Where a fault callback attaches. Tensor shapes seen by the callback:
///   layer_output   [batch, seq, d_model]         block output after both residuals
///   attn_scores    [batch, heads, seq, seq]      scaled scores with mask added, pre-softmax
///   attn_head_out  [batch, heads, seq, head_dim] per-head context before concatenation
///   mask           [batch, seq, seq]             additive mask (0 or -1e9)
struct HookSite {
  HookKind kind = HookKind::kLayerOutput;
  std::size_t layer = 0;
  auto operator<=>(const HookSite&) const = default;
  std::string to_string() const;
};

/// In-place transformation installed at a site.
using HookFn = std::function<void(Tensor&)>;
using HookId = std::uint64_t;

inline constexpr float kMaskedLogit = -1e9f;

/// Right-padded token ids, row-major [batch, seq]; `lengths[b]` real tokens per row.
struct TokenBatch {
  std::size_t batch = 0;
  std::size_t seq = 0;
  std::vector<std::int32_t> ids;
  std::vector<std::size_t> lengths;

  static TokenBatch from_sequences(const std::vector<std::vector<std::int32_t>>& seqs, std::int32_t pad_id);
  std::int32_t at(std::size_t b, std::size_t t) const { return ids[b * seq + t]; }
};

/// Scoped copy of parameters used for exact undo.
struct ParamSnapshot {
  std::uint64_t model_id = 0;
  TensorMap tensors;
};

/// GPT-2-family pre-LN transformer with named parameters and fault hook sites.
///
/// Parameters use canonical paths: `wte`, `wpe`, `layers.{i}.{ln1,attn.qkv,
/// attn.proj,ln2,mlp.fc,mlp.proj}.{weight,bias}`, `ln_f.{weight,bias}` and
/// `lm_head.{weight,bias}` or `cls_head.{weight,bias}`. Linear weights are
/// stored [in, out]. Non-copyable; use clone() for an independent instance
/// (fresh id, no hooks).
class TransformerModel {
 public:
  TransformerModel(ModelConfig config, TensorMap params);
  TransformerModel(TransformerModel&&) = default;
  TransformerModel& operator=(TransformerModel&&) = default;
  TransformerModel(const TransformerModel&) = delete;
  TransformerModel& operator=(const TransformerModel&) = delete;

  TransformerModel clone() const;

  const ModelConfig& config() const { return config_; }
  std::uint64_t id() const { return id_; }
  const TensorMap& params() const { return params_; }
  const Tensor& param(const std::string& name) const;
  Tensor& mutable_param(const std::string& name);
  const std::vector<LayerHandle>& layers() const { return layers_; }

  /// SHA-256 over (name, shape, bytes) of every parameter in name order.
  std::string parameter_hash() const;

  /// Snapshot every parameter (nullopt) or only block `layer`.
  ParamSnapshot snapshot_params(std::optional<std::size_t> layer = std::nullopt) const;
  /// Restores the snapshotted tensors bit-exactly. Throws RevertError on shape
  /// or name mismatch; nothing is written in that case.
  void restore_params(const ParamSnapshot& snapshot);

  /// Throws ConflictError if the site is occupied.
  HookId install_hook(const HookSite& site, HookFn fn);
  /// Returns false if no hook with that id exists.
  bool remove_hook(HookId id);
  std::size_t hook_count() const { return hooks_.size(); }
  bool has_hook(const HookSite& site) const { return hooks_.count(site) != 0; }
  /// Runs the hook at `site` on `t` in place; no-op if the site is empty.
  void apply_hook(const HookSite& site, Tensor& t) const;

  /// Causal LM logits [batch, seq, vocab].
  Tensor forward_logits(const TokenBatch& tokens) const;
  /// Classifier logits [batch, n_classes] from the first position.
  Tensor forward_classify(const TokenBatch& tokens) const;
  /// Temperature-0 continuation of `prompt` by up to `max_new` tokens (stops at max_seq_len).
  std::vector<std::int32_t> greedy_generate(std::vector<std::int32_t> prompt, std::size_t max_new) const;

 private:
  struct Hook {
    HookId id;
    HookFn fn;
  };

  Tensor hidden_states(const TokenBatch& tokens) const;
  Tensor attention(const Tensor& h, std::size_t layer, const TokenBatch& tokens, const Tensor& base_mask) const;
  void run_hook(HookKind kind, std::size_t layer, Tensor& t) const;

  ModelConfig config_;
  TensorMap params_;
  std::vector<LayerHandle> layers_;
  std::uint64_t id_;
  std::map<HookSite, Hook> hooks_;
  HookId next_hook_id_ = 1;
};

/// Builds the additive attention mask [batch, seq, seq]: key j is visible to
/// query i when j < lengths[b] and, if `causal`, j <= i.
Tensor build_attention_mask(const TokenBatch& tokens, bool causal);

}  // namespace faultlab
