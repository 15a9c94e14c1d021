// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "faultlab/error.hpp"
#include "faultlab/faults.hpp"
#include "faultlab/metrics.hpp"
#include "faultlab/toy_models.hpp"
#include "oracle/reference_transformer.hpp"
#include "test_util.hpp"

using namespace faultlab;

namespace {

EvalSet labelled(const std::vector<std::vector<std::int32_t>>& seqs, std::int32_t label, std::size_t batch_size = 4) {
  EvalSet set{Task::kClassify, {}};
  for (std::size_t s = 0; s < seqs.size(); s += batch_size) {
    std::vector<std::vector<std::int32_t>> chunk(seqs.begin() + s, seqs.begin() + std::min(s + batch_size, seqs.size()));
    EvalBatch b;
    b.tokens = TokenBatch::from_sequences(chunk, 0);
    b.labels.assign(chunk.size(), label);
    set.batches.push_back(b);
  }
  return set;
}

EvalSet lm_set(const std::vector<std::vector<std::int32_t>>& seqs, std::size_t batch_size = 2) {
  LMDataset ds;
  ds.sequences = seqs;
  return batch(ds, batch_size, 0);
}

TransformerModel biased_classifier() {
  const ModelConfig c = toy::small_classifier_config(1);
  TensorMap p = toy::zero_params(c);
  p.at("cls_head.bias")[0] = 5.0f;
  return TransformerModel(c, p);
}

}  // namespace

TEST(Accuracy, BiasForcedClassZero) {
  const TransformerModel m = biased_classifier();
  const auto inputs = testutil::fixed_inputs();
  EXPECT_EQ(Accuracy().evaluate(m, labelled(inputs, 0)).value, 1.0);
  EXPECT_EQ(Accuracy().evaluate(m, labelled(inputs, 1)).value, 0.0);
  EXPECT_EQ(Accuracy().evaluate(m, labelled(inputs, 0)).count, 10u);
}

TEST(Accuracy, TiesGoToLowestClass) {
  const ModelConfig c = toy::small_classifier_config(1);
  const TransformerModel zero(c, toy::zero_params(c));
  EXPECT_EQ(Accuracy().evaluate(zero, labelled(testutil::fixed_inputs(), 0)).value, 1.0);
}

TEST(Accuracy, MatchesPerExampleArgmaxOracle) {
  const TransformerModel m = toy::random_model(toy::small_classifier_config(2), 7);
  const auto records = toy::review_fixture(20, 5).records;
  std::vector<std::vector<std::int32_t>> seqs;
  EvalSet set{Task::kClassify, {}};
  std::size_t correct = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::vector<std::int32_t> ids;
    for (unsigned char ch : records[i].text) ids.push_back(2 + ch);
    const auto logits = oracle::cls_logits(m.config(), m.params(), ids);
    correct += (logits[1] > logits[0] ? 1 : 0) == records[i].label;
    seqs.push_back(ids);
  }
  for (std::size_t s = 0; s < seqs.size(); s += 8) {
    EvalBatch b;
    std::vector<std::vector<std::int32_t>> chunk(seqs.begin() + s, seqs.begin() + std::min(s + 8, seqs.size()));
    b.tokens = TokenBatch::from_sequences(chunk, 0);
    for (std::size_t i = s; i < s + chunk.size(); ++i) b.labels.push_back(records[i].label);
    set.batches.push_back(b);
  }
  EXPECT_DOUBLE_EQ(Accuracy().evaluate(m, set).value, static_cast<double>(correct) / 20.0);
}

TEST(Accuracy, RejectsOutOfRangeLabelsAndWrongTask) {
  const TransformerModel m = biased_classifier();
  EXPECT_THROW((void)Accuracy().evaluate(m, labelled(testutil::fixed_inputs(), 2)), InputError);
  EXPECT_THROW((void)Accuracy().evaluate(m, lm_set({{2, 3}})), InputError);
}

TEST(Accuracy, NonFiniteRowsCountAsWrong) {
  const ModelConfig c = toy::small_classifier_config(1);
  TensorMap p = toy::zero_params(c);
  p.at("cls_head.bias")[0] = std::numeric_limits<float>::quiet_NaN();
  const TransformerModel m(c, p);
  const MetricResult r = Accuracy().evaluate(m, labelled(testutil::fixed_inputs(), 0));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.aux.at("nonfinite_rows"), 10.0);
}

TEST(Perplexity, UniformModelGivesLogVocab) {
  const TransformerModel m = toy::uniform_lm(256);
  const EvalSet set = lm_set({{1, 2, 3, 4}, {5, 6}, {7, 8, 9}});
  EXPECT_NEAR(Perplexity(true).evaluate(m, set).value, std::log(256.0), 1e-12);
  EXPECT_NEAR(Perplexity(false).evaluate(m, set).value, 256.0, 1e-9);
  EXPECT_EQ(Perplexity(true).evaluate(m, set).count, 6u);
}

TEST(Perplexity, DominantTargetLogitDrivesLossToZero) {
  const ModelConfig c = toy::small_lm_config(1);
  TensorMap p = toy::zero_params(c);
  p.at("lm_head.bias")[9] = 40.0f;
  const TransformerModel m(c, p);
  EXPECT_LT(Perplexity(true).evaluate(m, lm_set({{9, 9, 9, 9}, {9, 9}})).value, 1e-9);
}

TEST(Perplexity, MatchesTokenByTokenOracle) {
  const TransformerModel m = toy::random_model(toy::small_lm_config(2), 7);
  std::vector<std::vector<std::int32_t>> seqs;
  for (const auto& line : toy::lm_fixture_lines()) {
    if (line.empty()) continue;
    std::vector<std::int32_t> ids;
    for (unsigned char ch : line.substr(0, 32)) ids.push_back(2 + ch);
    seqs.push_back(ids);
    if (seqs.size() == 5) break;
  }
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& s : seqs) {
    const auto [nll, n] = oracle::sequence_nll(m.config(), m.params(), s);
    total += nll;
    tokens += n;
  }
  const MetricResult r = Perplexity(true).evaluate(m, lm_set(seqs, 2));
  EXPECT_EQ(r.count, tokens);
  EXPECT_NEAR(r.value, total / static_cast<double>(tokens), 1e-6);
}

TEST(Perplexity, NonFiniteLogitsFlagNan) {
  const ModelConfig c = toy::small_lm_config(1);
  TensorMap p = toy::zero_params(c);
  p.at("lm_head.bias")[3] = std::numeric_limits<float>::infinity();
  const MetricResult r = Perplexity(true).evaluate(TransformerModel(c, p), lm_set({{2, 3, 4}}));
  EXPECT_TRUE(std::isnan(r.value));
  EXPECT_EQ(r.nan_reason, "non-finite logits");
}

TEST(TokenNll, MatchesClosedForm) {
  const float row[3] = {0.0f, std::log(3.0f), 0.0f};
  EXPECT_NEAR(token_nll(row, 3, 1), -std::log(3.0 / 5.0), 1e-7);
  const float bad[2] = {0.0f, std::numeric_limits<float>::quiet_NaN()};
  EXPECT_TRUE(std::isnan(token_nll(bad, 2, 0)));
}

TEST(Latency, RecordsEachRunAndAverages) {
  const TransformerModel m = biased_classifier();
  const EvalSet set = labelled(testutil::fixed_inputs(), 0);
  const MetricResult r = Latency(3).evaluate(m, set);
  ASSERT_EQ(r.aux.size(), 3u);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double t = r.aux.at("run_" + std::to_string(i));
    EXPECT_GT(t, 0.0);
    sum += t;
  }
  EXPECT_DOUBLE_EQ(r.value, sum / 3.0);
  const MetricResult one = Latency(1).evaluate(m, set);
  EXPECT_EQ(one.value, one.aux.at("run_0"));
  EXPECT_THROW(Latency(0), InputError);
}

TEST(MakeMetric, ParsesKnownSpecs) {
  EXPECT_EQ(make_metric("accuracy")->name(), "accuracy");
  EXPECT_EQ(make_metric("log_perplexity")->name(), "log_perplexity");
  EXPECT_EQ(make_metric("latency")->name(), "latency(runs=3)");
  EXPECT_EQ(make_metric("latency(runs=5)")->name(), "latency(runs=5)");
  EXPECT_TRUE(make_metric("latency")->is_timing());
  EXPECT_THROW((void)make_metric("f1"), SpecParseError);
  EXPECT_THROW((void)make_metric("latency(runs=0)"), SpecParseError);
}

TEST(EvaluateAll, OrderAndPurity) {
  const TransformerModel m = biased_classifier();
  const EvalSet set = labelled(testutil::fixed_inputs(), 0);
  EXPECT_TRUE(evaluate_all(m, {}, set).empty());
  std::vector<std::unique_ptr<Metric>> ms;
  ms.push_back(make_metric("accuracy"));
  ms.push_back(make_metric("latency(runs=2)"));
  const auto rs = evaluate_all(m, ms, set);
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[0].name, "accuracy");
  EXPECT_EQ(rs[1].name, "latency(runs=2)");
  EXPECT_EQ(rs[0], Accuracy().evaluate(m, set));
}

TEST(EvaluateAll, ErrorsNameTheMetric) {
  const TransformerModel m = biased_classifier();
  std::vector<std::unique_ptr<Metric>> ms;
  ms.push_back(make_metric("perplexity"));
  try {
    (void)evaluate_all(m, ms, labelled(testutil::fixed_inputs(), 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("perplexity"), std::string::npos);
  }
}
