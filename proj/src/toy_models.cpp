// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "faultlab/toy_models.hpp"

#include "faultlab/rng.hpp"
#include "faultlab/tokenizer.hpp"

namespace faultlab::toy {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void fill_normal(Tensor& t, Rng& rng, double mean, double sigma) {
  for (auto& v : t.data()) v = static_cast<float>(mean + sigma * rng.normal());
}

int byte_score(unsigned char c) {
  if (c == 'o') return 1;
  if (c == 'a') return -1;
  return 0;
}

}  // namespace

TensorMap zero_params(const ModelConfig& config) {
  TensorMap params;
  for (const auto& [name, shape] : canonical_shapes(config)) params.emplace(name, Tensor(shape));
  return params;
}

TransformerModel random_model(const ModelConfig& config, std::uint64_t seed, float scale) {
  Rng rng(seed);
  TensorMap params = zero_params(config);
  for (auto& [name, t] : params) {
    const bool ln = name.find("ln") != std::string::npos;
    if (ln && ends_with(name, ".weight")) {
      fill_normal(t, rng, 1.0, 0.1);
    } else if (ln) {
      fill_normal(t, rng, 0.0, 0.1);
    } else if (ends_with(name, ".bias")) {
      fill_normal(t, rng, 0.0, scale / 4.0);
    } else {
      fill_normal(t, rng, 0.0, scale);
    }
  }
  return TransformerModel(config, std::move(params));
}

ModelConfig small_lm_config(std::size_t n_layers) {
  ModelConfig c;
  c.arch = Arch::kCausalLm;
  c.n_layers = n_layers;
  c.n_heads = 2;
  c.d_model = 16;
  c.d_ff = 32;
  c.vocab_size = 258;
  c.max_seq_len = 32;
  return c;
}

ModelConfig small_classifier_config(std::size_t n_layers) {
  ModelConfig c = small_lm_config(n_layers);
  c.arch = Arch::kClassifier;
  c.n_classes = 2;
  return c;
}

TransformerModel uniform_lm(std::size_t vocab, std::size_t max_seq_len) {
  ModelConfig c;
  c.arch = Arch::kCausalLm;
  c.n_layers = 1;
  c.n_heads = 1;
  c.d_model = 4;
  c.d_ff = 8;
  c.vocab_size = vocab;
  c.max_seq_len = max_seq_len;
  return TransformerModel(c, zero_params(c));
}

// Residual layout (d_model 16):
//   dim 0, 1     +s, -s with s the byte score
//   dims 2..13   fixed +1/-1 pattern (zero mean, so LayerNorm keeps dim 0 = s)
//   dims 14, 15  +g*m, -g*m written by layer 0, m = mean score over the sequence
TransformerModel sentiment_classifier(std::uint64_t seed, std::size_t n_layers) {
  ModelConfig c = small_classifier_config(n_layers);
  c.max_seq_len = 64;
  const std::size_t D = c.d_model;
  constexpr float kGain = 10.0f;
  constexpr float kHead = 2.0f;
  constexpr double kBlockScale = 0.02;

  Rng rng(seed);
  TensorMap p = zero_params(c);
  Tensor& wte = p.at("wte");
  for (std::size_t id = 0; id < c.vocab_size; ++id) {
    const int s = id >= static_cast<std::size_t>(Tokenizer::kByteOffset)
                      ? byte_score(static_cast<unsigned char>(id - Tokenizer::kByteOffset))
                      : 0;
    wte.at2(id, 0) = static_cast<float>(s);
    wte.at2(id, 1) = static_cast<float>(-s);
    for (std::size_t k = 2; k < 14; ++k) wte.at2(id, k) = (k % 2 == 0) ? 1.0f : -1.0f;
  }
  fill_normal(p.at("wpe"), rng, 0.0, 1e-3);

  for (std::size_t i = 0; i < n_layers; ++i) {
    const std::string pre = "layers." + std::to_string(i) + ".";
    for (const char* ln : {"ln1.weight", "ln2.weight"}) {
      for (auto& v : p.at(pre + ln).data()) v = 1.0f;
    }
    if (i == 0) {
      // Zero Q/K: uniform attention over visible keys. V head 0 lane 0 = LN dim 0.
      p.at(pre + "attn.qkv.weight").at2(0, 2 * D) = 1.0f;
      Tensor& proj = p.at(pre + "attn.proj.weight");
      proj.at2(0, 14) = kGain;
      proj.at2(0, 15) = -kGain;
      continue;
    }
    for (const char* w : {"attn.qkv.weight", "attn.proj.weight", "mlp.fc.weight", "mlp.proj.weight"}) {
      fill_normal(p.at(pre + w), rng, 0.0, kBlockScale);
    }
  }
  for (auto& v : p.at("ln_f.weight").data()) v = 1.0f;
  Tensor& head = p.at("cls_head.weight");
  head.at2(14, 1) = kHead;
  head.at2(15, 1) = -kHead;
  head.at2(14, 0) = -kHead;
  head.at2(15, 0) = kHead;
  return TransformerModel(c, std::move(p));
}

ClassificationDataset review_fixture(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> kPositive = {"good",   "cool", "wow",   "lovely", "top",    "solid",
                                                      "joyous", "bold", "smooth", "moving", "wonderful"};
  static const std::vector<std::string> kNegative = {"bad",  "awful", "sad",   "lame",  "trash",    "crap",
                                                      "weak", "bland", "nasty", "stale", "dreadful", "flat"};
  static const std::vector<std::string> kFiller = {"this", "film", "is",     "the",    "it",   "just",
                                                    "very", "truly", "quite", "script", "every", "minute"};
  Rng rng = Rng::derive(seed, "reviews");
  auto pick = [&](const std::vector<std::string>& words) -> const std::string& {
    return words[rng.uniform_index(words.size())];
  };
  ClassificationDataset ds;
  while (ds.records.size() < n) {
    const bool positive = rng.bernoulli(0.5);
    std::vector<std::string> words;
    const std::size_t n_main = 1 + rng.uniform_index(2);
    for (std::size_t k = 0; k < n_main; ++k) words.push_back(pick(positive ? kPositive : kNegative));
    if (rng.bernoulli(0.2)) words.push_back(pick(positive ? kNegative : kPositive));
    const std::size_t n_fill = 1 + rng.uniform_index(3);
    for (std::size_t k = 0; k < n_fill; ++k) {
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(words.size() + 1)), pick(kFiller));
    }
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    int score = 0;
    for (unsigned char ch : text) score += byte_score(ch);
    if (score == 0 || text.size() > 32) continue;
    ds.records.push_back({text, score > 0 ? 1 : 0});
  }
  return ds;
}

std::vector<std::string> lm_fixture_lines() {
  return {
      "the valley road runs north past the old mill",
      "",
      "rain fell on the harbour for most of the week",
      "a small museum keeps maps of the early railway",
      "the river floods in spring and the fields turn green",
      "",
      "local records name the bridge after a ferry pilot",
      "the station closed in winter and reopened in may",
      "fishing boats leave before dawn and return at noon",
      "the library holds letters from the first settlers",
      "",
      "a stone wall marks the edge of the common land",
      "the town band plays in the square every summer",
  };
}

}  // namespace faultlab::toy
