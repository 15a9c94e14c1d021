// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "faultlab/error.hpp"
#include "faultlab/model.hpp"
#include "faultlab/toy_models.hpp"
#include "oracle/reference_transformer.hpp"
#include "test_util.hpp"

using namespace faultlab;

TEST(ModelConfig, ValidateRejectsBadDimensions) {
  ModelConfig c = toy::small_lm_config();
  c.n_heads = 3;
  EXPECT_THROW(c.validate(), InputError);
  c = toy::small_classifier_config();
  c.n_classes = 0;
  EXPECT_THROW(c.validate(), InputError);
  EXPECT_NO_THROW(toy::small_lm_config().validate());
}

TEST(ModelConfig, JsonRoundTrip) {
  const ModelConfig c = toy::small_classifier_config(3);
  EXPECT_EQ(nlohmann::json(c).get<ModelConfig>(), c);
}

TEST(Model, ConstructorRejectsMissingWrongAndExtraTensors) {
  const ModelConfig c = toy::small_lm_config(2);
  TensorMap p = toy::zero_params(c);
  p.erase("layers.1.ln2.bias");
  EXPECT_THROW(TransformerModel(c, p), StructureError);
  p = toy::zero_params(c);
  p["wte"] = Tensor({3, 3});
  EXPECT_THROW(TransformerModel(c, p), StructureError);
  p = toy::zero_params(c);
  p["layers.2.ln1.weight"] = Tensor({16});
  EXPECT_THROW(TransformerModel(c, p), StructureError);
}

TEST(Model, ResolveLayersReportsMissingIndex) {
  const ModelConfig c = toy::small_lm_config(3);
  TensorMap p = toy::zero_params(c);
  for (const auto& n : layer_param_names(1)) p.erase(n);
  try {
    (void)resolve_layers(p, c);
    FAIL() << "expected StructureError";
  } catch (const StructureError& e) {
    EXPECT_NE(std::string(e.what()).find("missing layer index 1"), std::string::npos) << e.what();
  }
}

TEST(Model, LayersResolvedInOrder) {
  const TransformerModel m = toy::random_model(toy::small_lm_config(3), 1);
  ASSERT_EQ(m.layers().size(), 3u);
  EXPECT_EQ(m.layers()[2].prefix, "layers.2.");
  EXPECT_EQ(m.layers()[0].param_names.size(), 12u);
}

TEST(Model, LmForwardMatchesStraightLineOracle) {
  const TransformerModel m = toy::random_model(toy::small_lm_config(2), 7);
  for (const auto& ids : testutil::fixed_inputs()) {
    const Tensor got = m.forward_logits(TokenBatch::from_sequences({ids}, 0));
    const auto want = oracle::lm_logits(m.config(), m.params(), ids);
    for (std::size_t t = 0; t < ids.size(); ++t) {
      for (std::size_t v = 0; v < m.config().vocab_size; ++v) {
        ASSERT_NEAR(got[t * m.config().vocab_size + v], want[t][v], 1e-5) << "t=" << t << " v=" << v;
      }
    }
  }
}

TEST(Model, ClassifierForwardMatchesStraightLineOracle) {
  const TransformerModel m = toy::random_model(toy::small_classifier_config(2), 7);
  for (const auto& ids : testutil::fixed_inputs()) {
    const Tensor got = m.forward_classify(TokenBatch::from_sequences({ids}, 0));
    const auto want = oracle::cls_logits(m.config(), m.params(), ids);
    for (std::size_t c = 0; c < 2; ++c) ASSERT_NEAR(got[c], want[c], 1e-5);
  }
}

TEST(Model, BatchingAndPaddingDoNotChangeRealPositions) {
  const TransformerModel m = toy::random_model(toy::small_lm_config(2), 7);
  const auto inputs = testutil::fixed_inputs();
  const TokenBatch batch = TokenBatch::from_sequences(inputs, 0);
  const Tensor all = m.forward_logits(batch);
  const std::size_t V = m.config().vocab_size;
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    const Tensor one = m.forward_logits(TokenBatch::from_sequences({inputs[b]}, 0));
    for (std::size_t t = 0; t < inputs[b].size(); ++t) {
      for (std::size_t v = 0; v < V; ++v) {
        ASSERT_EQ(float_bits(all[(b * batch.seq + t) * V + v]), float_bits(one[t * V + v]));
      }
    }
  }
}

TEST(Model, RejectsBadInputs) {
  const TransformerModel lm = toy::random_model(toy::small_lm_config(1), 7);
  EXPECT_THROW((void)lm.forward_logits(TokenBatch::from_sequences({{5, 9999}}, 0)), InputError);
  EXPECT_THROW((void)lm.forward_logits(TokenBatch::from_sequences({std::vector<std::int32_t>(33, 5)}, 0)), InputError);
  EXPECT_THROW((void)lm.forward_classify(TokenBatch::from_sequences({{5}}, 0)), InputError);
  const TransformerModel cls = toy::random_model(toy::small_classifier_config(1), 7);
  EXPECT_THROW((void)cls.forward_logits(TokenBatch::from_sequences({{5}}, 0)), InputError);
}

TEST(Model, TokenBatchRightPads) {
  const TokenBatch b = TokenBatch::from_sequences({{3, 4, 5}, {6}}, 0);
  EXPECT_EQ(b.seq, 3u);
  EXPECT_EQ(b.lengths, (std::vector<std::size_t>{3, 1}));
  EXPECT_EQ(b.at(1, 0), 6);
  EXPECT_EQ(b.at(1, 2), 0);
}

TEST(Model, AttentionMaskIsCausalAndHidesPadding) {
  const TokenBatch b = TokenBatch::from_sequences({{3, 4, 5}, {6, 7}}, 0);
  const Tensor causal = build_attention_mask(b, true);
  EXPECT_EQ(causal[0 * 9 + 0 * 3 + 1], kMaskedLogit);
  EXPECT_EQ(causal[0 * 9 + 2 * 3 + 1], 0.0f);
  EXPECT_EQ(causal[1 * 9 + 1 * 3 + 2], kMaskedLogit);
  const Tensor full = build_attention_mask(b, false);
  EXPECT_EQ(full[0 * 9 + 0 * 3 + 2], 0.0f);
  EXPECT_EQ(full[1 * 9 + 0 * 3 + 2], kMaskedLogit);
}

TEST(Model, ParamAccessAndTargetingErrors) {
  TransformerModel m = toy::random_model(toy::small_lm_config(1), 7);
  EXPECT_EQ(m.param("wte").shape(), (Shape{258, 16}));
  EXPECT_THROW((void)m.param("layers.5.ln1.weight"), TargetingError);
  EXPECT_THROW((void)m.mutable_param("nope"), TargetingError);
}

TEST(Model, ParameterHashTracksEveryBit) {
  TransformerModel m = toy::random_model(toy::small_lm_config(1), 7);
  const std::string h = m.parameter_hash();
  EXPECT_EQ(h.size(), 64u);
  Tensor& w = m.mutable_param("layers.0.mlp.fc.weight");
  w[3] = bits_float(float_bits(w[3]) ^ 1u);
  EXPECT_NE(m.parameter_hash(), h);
  w[3] = bits_float(float_bits(w[3]) ^ 1u);
  EXPECT_EQ(m.parameter_hash(), h);
}

TEST(Model, CloneIsIndependentWithFreshId) {
  TransformerModel m = toy::random_model(toy::small_lm_config(1), 7);
  m.install_hook({HookKind::kLayerOutput, 0}, [](Tensor&) {});
  TransformerModel c = m.clone();
  EXPECT_NE(c.id(), m.id());
  EXPECT_EQ(c.hook_count(), 0u);
  EXPECT_EQ(c.parameter_hash(), m.parameter_hash());
  c.mutable_param("wte")[0] += 1.0f;
  EXPECT_NE(c.parameter_hash(), m.parameter_hash());
}

TEST(Model, SnapshotRestoreIsExact) {
  TransformerModel m = toy::random_model(toy::small_lm_config(2), 7);
  const std::string h = m.parameter_hash();
  const ParamSnapshot snap = m.snapshot_params(1);
  EXPECT_EQ(snap.tensors.size(), 12u);
  for (const auto& [name, t] : snap.tensors) {
    for (auto& v : m.mutable_param(name).data()) v = 42.0f;
  }
  m.restore_params(snap);
  EXPECT_EQ(m.parameter_hash(), h);
}

TEST(Model, RestoreRejectsShapeMismatchWithoutWriting) {
  TransformerModel m = toy::random_model(toy::small_lm_config(1), 7);
  ParamSnapshot snap = m.snapshot_params();
  snap.tensors["wte"] = Tensor({2, 2});
  m.mutable_param("wpe")[0] += 1.0f;
  const std::string h = m.parameter_hash();
  try {
    m.restore_params(snap);
    FAIL();
  } catch (const RevertError& e) {
    EXPECT_EQ(e.kind(), RevertErrorKind::kShapeMismatch);
  }
  EXPECT_EQ(m.parameter_hash(), h);
}

TEST(Model, HooksOneSlotPerSite) {
  TransformerModel m = toy::random_model(toy::small_lm_config(2), 7);
  const HookId id = m.install_hook({HookKind::kAttnScores, 1}, [](Tensor&) {});
  EXPECT_THROW(m.install_hook({HookKind::kAttnScores, 1}, [](Tensor&) {}), ConflictError);
  EXPECT_NO_THROW(m.install_hook({HookKind::kAttnScores, 0}, [](Tensor&) {}));
  EXPECT_TRUE(m.has_hook({HookKind::kAttnScores, 1}));
  EXPECT_TRUE(m.remove_hook(id));
  EXPECT_FALSE(m.remove_hook(id));
  EXPECT_EQ(m.hook_count(), 1u);
}

TEST(Model, HookSitesSeeDocumentedShapes) {
  TransformerModel m = toy::random_model(toy::small_lm_config(2), 7);
  std::map<HookKind, Shape> seen;
  for (auto kind : {HookKind::kLayerOutput, HookKind::kAttnScores, HookKind::kAttnHeadOutput, HookKind::kMask}) {
    m.install_hook({kind, 1}, [&seen, kind](Tensor& t) { seen[kind] = t.shape(); });
  }
  (void)m.forward_logits(TokenBatch::from_sequences({{2, 3, 4}, {5, 6}}, 0));
  EXPECT_EQ(seen[HookKind::kLayerOutput], (Shape{2, 3, 16}));
  EXPECT_EQ(seen[HookKind::kAttnScores], (Shape{2, 2, 3, 3}));
  EXPECT_EQ(seen[HookKind::kAttnHeadOutput], (Shape{2, 2, 3, 8}));
  EXPECT_EQ(seen[HookKind::kMask], (Shape{2, 3, 3}));
}

TEST(Model, LayerOutputHookChangesLogits) {
  TransformerModel m = toy::random_model(toy::small_lm_config(2), 7);
  const TokenBatch b = TokenBatch::from_sequences({{2, 3, 4}}, 0);
  const Tensor before = m.forward_logits(b);
  const HookId id = m.install_hook({HookKind::kLayerOutput, 0}, [](Tensor& t) {
    for (auto& v : t.data()) v = 0.0f;
  });
  EXPECT_FALSE(m.forward_logits(b).bitwise_equal(before));
  m.remove_hook(id);
  EXPECT_TRUE(m.forward_logits(b).bitwise_equal(before));
}

TEST(Model, GreedyGenerateIsDeterministicAndBounded) {
  const TransformerModel m = toy::random_model(toy::small_lm_config(2), 7);
  const auto a = m.greedy_generate({2, 3}, 5);
  EXPECT_EQ(a.size(), 7u);
  EXPECT_EQ(m.greedy_generate({2, 3}, 5), a);
  EXPECT_EQ(m.greedy_generate({2, 3}, 100).size(), m.config().max_seq_len);
  const Tensor logits = m.forward_logits(TokenBatch::from_sequences({{2, 3}}, 0));
  std::size_t best = 0;
  for (std::size_t v = 0; v < 258; ++v) {
    if (logits[258 + v] > logits[258 + best]) best = v;
  }
  EXPECT_EQ(a[2], static_cast<std::int32_t>(best));
}

TEST(Model, SentimentClassifierFollowsByteScoreRule) {
  const TransformerModel m = toy::sentiment_classifier();
  EXPECT_EQ(m.config().n_layers, 10u);
  auto classify = [&](const std::string& text) {
    std::vector<std::int32_t> ids;
    for (unsigned char c : text) ids.push_back(2 + c);
    const Tensor l = m.forward_classify(TokenBatch::from_sequences({ids}, 0));
    return l[1] > l[0] ? 1 : 0;
  };
  EXPECT_EQ(classify("good film"), 1);
  EXPECT_EQ(classify("bad film"), 0);
  EXPECT_EQ(classify("this is just awful"), 0);
  EXPECT_EQ(classify("wow"), 1);
}
