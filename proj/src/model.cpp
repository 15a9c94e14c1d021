// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "faultlab/model.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstring>

#include "faultlab/error.hpp"
#include "faultlab/hash.hpp"
#include "faultlab/kernels.hpp"

namespace faultlab {

namespace {

std::atomic<std::uint64_t> g_next_model_id{1};

const char* const kBlockParams[] = {
    "ln1.weight",      "ln1.bias",      "attn.qkv.weight", "attn.qkv.bias", "attn.proj.weight", "attn.proj.bias",
    "ln2.weight",      "ln2.bias",      "mlp.fc.weight",   "mlp.fc.bias",   "mlp.proj.weight",  "mlp.proj.bias",
};

std::string layer_prefix(std::size_t i) { return "layers." + std::to_string(i) + "."; }

}  // namespace

const char* to_string(Arch arch) { return arch == Arch::kCausalLm ? "causal_lm" : "classifier"; }

Arch arch_from_string(const std::string& text) {
  if (text == "causal_lm") return Arch::kCausalLm;
  if (text == "classifier") return Arch::kClassifier;
  throw InputError("unknown arch '" + text + "'");
}

void ModelConfig::validate() const {
  if (n_layers < 1 || n_heads < 1 || d_model < 1 || d_ff < 1 || vocab_size < 1 || max_seq_len < 1) {
    throw InputError("model config: every dimension must be >= 1");
  }
  if (d_model % n_heads != 0) {
    throw InputError("model config: d_model " + std::to_string(d_model) + " not divisible by n_heads " +
                     std::to_string(n_heads));
  }
  if (arch == Arch::kClassifier && n_classes < 1) throw InputError("model config: classifier needs n_classes >= 1");
  if (!(layer_norm_eps >= 0.0f)) throw InputError("model config: layer_norm_eps must be >= 0");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"arch", to_string(c.arch)},         {"n_layers", c.n_layers},
                     {"n_heads", c.n_heads},              {"d_model", c.d_model},
                     {"d_ff", c.d_ff},                    {"vocab_size", c.vocab_size},
                     {"max_seq_len", c.max_seq_len},      {"n_classes", c.n_classes},
                     {"layer_norm_eps", c.layer_norm_eps}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.arch = arch_from_string(j.at("arch").get<std::string>());
  j.at("n_layers").get_to(c.n_layers);
  j.at("n_heads").get_to(c.n_heads);
  j.at("d_model").get_to(c.d_model);
  j.at("d_ff").get_to(c.d_ff);
  j.at("vocab_size").get_to(c.vocab_size);
  j.at("max_seq_len").get_to(c.max_seq_len);
  c.n_classes = j.value("n_classes", std::size_t{0});
  c.layer_norm_eps = j.value("layer_norm_eps", 1e-5f);
}

std::map<std::string, Shape> canonical_shapes(const ModelConfig& c) {
  const std::size_t d = c.d_model;
  std::map<std::string, Shape> s;
  s["wte"] = {c.vocab_size, d};
  s["wpe"] = {c.max_seq_len, d};
  for (std::size_t i = 0; i < c.n_layers; ++i) {
    const std::string p = layer_prefix(i);
    s[p + "ln1.weight"] = {d};
    s[p + "ln1.bias"] = {d};
    s[p + "attn.qkv.weight"] = {d, 3 * d};
    s[p + "attn.qkv.bias"] = {3 * d};
    s[p + "attn.proj.weight"] = {d, d};
    s[p + "attn.proj.bias"] = {d};
    s[p + "ln2.weight"] = {d};
    s[p + "ln2.bias"] = {d};
    s[p + "mlp.fc.weight"] = {d, c.d_ff};
    s[p + "mlp.fc.bias"] = {c.d_ff};
    s[p + "mlp.proj.weight"] = {c.d_ff, d};
    s[p + "mlp.proj.bias"] = {d};
  }
  s["ln_f.weight"] = {d};
  s["ln_f.bias"] = {d};
  if (c.arch == Arch::kCausalLm) {
    s["lm_head.weight"] = {d, c.vocab_size};
    s["lm_head.bias"] = {c.vocab_size};
  } else {
    s["cls_head.weight"] = {d, c.n_classes};
    s["cls_head.bias"] = {c.n_classes};
  }
  return s;
}

std::vector<std::string> layer_param_names(std::size_t layer) {
  std::vector<std::string> names;
  const std::string p = layer_prefix(layer);
  for (const char* leaf : kBlockParams) names.push_back(p + leaf);
  std::sort(names.begin(), names.end());
  return names;
}

std::vector<LayerHandle> resolve_layers(const TensorMap& params, const ModelConfig& config) {
  std::map<std::size_t, std::vector<std::string>> found;
  for (const auto& [name, tensor] : params) {
    if (name.rfind("layers.", 0) != 0) continue;
    const char* begin = name.data() + 7;
    const char* end = name.data() + name.size();
    std::size_t idx = 0;
    auto [ptr, ec] = std::from_chars(begin, end, idx);
    if (ec != std::errc{} || ptr == begin || ptr == end || *ptr != '.') {
      throw StructureError("malformed layer path '" + name + "'");
    }
    found[idx].push_back(name);
  }
  for (std::size_t i = 0; i < config.n_layers; ++i) {
    if (!found.count(i)) throw StructureError("missing layer index " + std::to_string(i));
  }
  if (!found.empty() && found.rbegin()->first >= config.n_layers) {
    throw StructureError("layer index " + std::to_string(found.rbegin()->first) + " exceeds n_layers " +
                         std::to_string(config.n_layers));
  }
  std::vector<LayerHandle> out;
  for (auto& [idx, names] : found) out.push_back({idx, layer_prefix(idx), std::move(names)});
  return out;
}

std::string HookSite::to_string() const {
  const char* k = "layer_output";
  switch (kind) {
    case HookKind::kLayerOutput: k = "layer_output"; break;
    case HookKind::kAttnScores: k = "attn_scores"; break;
    case HookKind::kAttnHeadOutput: k = "attn_head_output"; break;
    case HookKind::kMask: k = "mask"; break;
  }
  return std::string(k) + "(" + std::to_string(layer) + ")";
}

TokenBatch TokenBatch::from_sequences(const std::vector<std::vector<std::int32_t>>& seqs, std::int32_t pad_id) {
  TokenBatch tb;
  tb.batch = seqs.size();
  for (const auto& s : seqs) tb.seq = std::max(tb.seq, s.size());
  tb.ids.assign(tb.batch * tb.seq, pad_id);
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    std::copy(seqs[b].begin(), seqs[b].end(), tb.ids.begin() + b * tb.seq);
    tb.lengths.push_back(seqs[b].size());
  }
  return tb;
}

Tensor build_attention_mask(const TokenBatch& tokens, bool causal) {
  const std::size_t T = tokens.seq;
  Tensor mask({tokens.batch, T, T});
  for (std::size_t b = 0; b < tokens.batch; ++b)
    for (std::size_t i = 0; i < T; ++i)
      for (std::size_t j = 0; j < T; ++j) {
        const bool visible = j < tokens.lengths[b] && (!causal || j <= i);
        mask[(b * T + i) * T + j] = visible ? 0.0f : kMaskedLogit;
      }
  return mask;
}

TransformerModel::TransformerModel(ModelConfig config, TensorMap params)
    : config_(std::move(config)), params_(std::move(params)), id_(g_next_model_id++) {
  config_.validate();
  layers_ = resolve_layers(params_, config_);
  const auto shapes = canonical_shapes(config_);
  for (const auto& [name, shape] : shapes) {
    auto it = params_.find(name);
    if (it == params_.end()) throw StructureError("missing parameter '" + name + "'");
    if (it->second.shape() != shape) {
      throw StructureError("parameter '" + name + "' has shape " + shape_to_string(it->second.shape()) +
                           ", expected " + shape_to_string(shape));
    }
  }
  for (const auto& [name, tensor] : params_) {
    if (!shapes.count(name)) throw StructureError("unexpected parameter '" + name + "'");
  }
}

TransformerModel TransformerModel::clone() const { return TransformerModel(config_, params_); }

const Tensor& TransformerModel::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw TargetingError("no parameter '" + name + "'");
  return it->second;
}

Tensor& TransformerModel::mutable_param(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw TargetingError("no parameter '" + name + "'");
  return it->second;
}

std::string TransformerModel::parameter_hash() const {
  Sha256 h;
  for (const auto& [name, t] : params_) {
    h.update(name);
    h.update("\0", 1);
    for (auto d : t.shape()) {
      const std::uint64_t dim = d;
      h.update(&dim, sizeof dim);
    }
    h.update(t.raw(), t.numel() * sizeof(float));
  }
  return h.hex_digest();
}

ParamSnapshot TransformerModel::snapshot_params(std::optional<std::size_t> layer) const {
  ParamSnapshot snap{id_, {}};
  if (!layer) {
    snap.tensors = params_;
    return snap;
  }
  if (*layer >= config_.n_layers) throw TargetingError("snapshot: no layer " + std::to_string(*layer));
  for (const auto& name : layer_param_names(*layer)) snap.tensors.emplace(name, params_.at(name));
  return snap;
}

void TransformerModel::restore_params(const ParamSnapshot& snapshot) {
  for (const auto& [name, t] : snapshot.tensors) {
    auto it = params_.find(name);
    if (it == params_.end() || it->second.shape() != t.shape()) {
      throw RevertError(RevertErrorKind::kShapeMismatch, "restore: snapshot tensor '" + name +
                                                             "' does not match the model");
    }
  }
  for (const auto& [name, t] : snapshot.tensors) params_.at(name) = t;
}

HookId TransformerModel::install_hook(const HookSite& site, HookFn fn) {
  if (site.layer >= config_.n_layers) throw TargetingError("hook site " + site.to_string() + " out of range");
  if (hooks_.count(site)) throw ConflictError("hook site " + site.to_string() + " already has a fault");
  const HookId id = next_hook_id_++;
  hooks_.emplace(site, Hook{id, std::move(fn)});
  return id;
}

bool TransformerModel::remove_hook(HookId id) {
  for (auto it = hooks_.begin(); it != hooks_.end(); ++it) {
    if (it->second.id == id) {
      hooks_.erase(it);
      return true;
    }
  }
  return false;
}

void TransformerModel::apply_hook(const HookSite& site, Tensor& t) const {
  auto it = hooks_.find(site);
  if (it != hooks_.end()) it->second.fn(t);
}

void TransformerModel::run_hook(HookKind kind, std::size_t layer, Tensor& t) const { apply_hook({kind, layer}, t); }

Tensor TransformerModel::attention(const Tensor& h, std::size_t layer, const TokenBatch& tokens,
                                   const Tensor& base_mask) const {
  const std::string p = layer_prefix(layer);
  const HeadLayout lay{tokens.batch, tokens.seq, config_.n_heads, config_.head_dim()};
  const Tensor qkv = linear(h, params_.at(p + "attn.qkv.weight"), params_.at(p + "attn.qkv.bias"));

  Tensor scores;
  if (has_hook({HookKind::kMask, layer})) {
    Tensor mask = base_mask;
    run_hook(HookKind::kMask, layer, mask);
    scores = head_scores(qkv, lay, mask);
  } else {
    scores = head_scores(qkv, lay, base_mask);
  }
  run_hook(HookKind::kAttnScores, layer, scores);
  const Tensor probs = softmax_lastdim(scores);
  Tensor ctx = head_context(probs, qkv, lay);
  run_hook(HookKind::kAttnHeadOutput, layer, ctx);

  // [batch, heads, seq, hd] -> [batch, seq, d_model]
  const std::size_t B = lay.batch, H = lay.n_heads, T = lay.seq, hd = lay.head_dim;
  Tensor merged({B, T, H * hd});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t hh = 0; hh < H; ++hh)
      for (std::size_t t = 0; t < T; ++t)
        std::memcpy(merged.raw() + (b * T + t) * H * hd + hh * hd, ctx.raw() + ((b * H + hh) * T + t) * hd,
                    hd * sizeof(float));
  return linear(merged, params_.at(p + "attn.proj.weight"), params_.at(p + "attn.proj.bias"));
}

Tensor TransformerModel::hidden_states(const TokenBatch& tokens) const {
  const std::size_t B = tokens.batch, T = tokens.seq, D = config_.d_model;
  if (B == 0 || T == 0) throw InputError("forward: empty batch");
  if (T > config_.max_seq_len) {
    throw InputError("forward: sequence length " + std::to_string(T) + " exceeds max_seq_len " +
                     std::to_string(config_.max_seq_len));
  }
  if (tokens.ids.size() != B * T || tokens.lengths.size() != B) throw InputError("forward: malformed token batch");
  for (auto len : tokens.lengths) {
    if (len == 0 || len > T) throw InputError("forward: sequence lengths must be in [1, seq]");
  }

  const Tensor& wte = params_.at("wte");
  const Tensor& wpe = params_.at("wpe");
  Tensor x({B, T, D});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < T; ++t) {
      const std::int32_t id = tokens.at(b, t);
      if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
        throw InputError("forward: token id " + std::to_string(id) + " out of range for vocab " +
                         std::to_string(config_.vocab_size));
      }
      float* row = x.raw() + (b * T + t) * D;
      const float* e = wte.raw() + static_cast<std::size_t>(id) * D;
      const float* pe = wpe.raw() + t * D;
      for (std::size_t k = 0; k < D; ++k) row[k] = e[k] + pe[k];
    }

  const Tensor mask = build_attention_mask(tokens, config_.arch == Arch::kCausalLm);
  const float eps = config_.layer_norm_eps;
  for (std::size_t i = 0; i < config_.n_layers; ++i) {
    const std::string p = layer_prefix(i);
    const Tensor h1 = layer_norm(x, params_.at(p + "ln1.weight"), params_.at(p + "ln1.bias"), eps);
    const Tensor a = attention(h1, i, tokens, mask);
    for (std::size_t k = 0; k < x.numel(); ++k) x[k] += a[k];
    const Tensor h2 = layer_norm(x, params_.at(p + "ln2.weight"), params_.at(p + "ln2.bias"), eps);
    const Tensor f = gelu(linear(h2, params_.at(p + "mlp.fc.weight"), params_.at(p + "mlp.fc.bias")));
    const Tensor m = linear(f, params_.at(p + "mlp.proj.weight"), params_.at(p + "mlp.proj.bias"));
    for (std::size_t k = 0; k < x.numel(); ++k) x[k] += m[k];
    run_hook(HookKind::kLayerOutput, i, x);
  }
  return x;
}

Tensor TransformerModel::forward_logits(const TokenBatch& tokens) const {
  if (config_.arch != Arch::kCausalLm) throw InputError("forward_logits requires a causal_lm model");
  const Tensor x = hidden_states(tokens);
  const Tensor h = layer_norm(x, params_.at("ln_f.weight"), params_.at("ln_f.bias"), config_.layer_norm_eps);
  return linear(h, params_.at("lm_head.weight"), params_.at("lm_head.bias"));
}

Tensor TransformerModel::forward_classify(const TokenBatch& tokens) const {
  if (config_.arch != Arch::kClassifier) throw InputError("forward_classify requires a classifier model");
  const Tensor x = hidden_states(tokens);
  const std::size_t B = tokens.batch, T = tokens.seq, D = config_.d_model;
  Tensor first({B, D});
  for (std::size_t b = 0; b < B; ++b) std::memcpy(first.raw() + b * D, x.raw() + b * T * D, D * sizeof(float));
  const Tensor h = layer_norm(first, params_.at("ln_f.weight"), params_.at("ln_f.bias"), config_.layer_norm_eps);
  return linear(h, params_.at("cls_head.weight"), params_.at("cls_head.bias"));
}

std::vector<std::int32_t> TransformerModel::greedy_generate(std::vector<std::int32_t> prompt,
                                                            std::size_t max_new) const {
  if (prompt.empty()) throw InputError("greedy_generate: empty prompt");
  const std::size_t V = config_.vocab_size;
  for (std::size_t step = 0; step < max_new && prompt.size() < config_.max_seq_len; ++step) {
    const Tensor logits = forward_logits(TokenBatch::from_sequences({prompt}, 0));
    const float* last = logits.raw() + (prompt.size() - 1) * V;
    std::size_t best = 0;
    for (std::size_t v = 1; v < V; ++v) {
      if (last[v] > last[best]) best = v;
    }
    prompt.push_back(static_cast<std::int32_t>(best));
  }
  return prompt;
}

}  // namespace faultlab
