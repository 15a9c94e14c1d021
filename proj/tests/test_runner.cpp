// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "faultlab/checkpoint.hpp"
#include "faultlab/error.hpp"
#include "faultlab/runner.hpp"
#include "faultlab/toy_models.hpp"
#include "test_util.hpp"

using namespace faultlab;
using nlohmann::json;

namespace {

ExperimentConfig classify_config() {
  ExperimentConfig c;
  c.metrics = {"accuracy"};
  c.model_path = "in-memory";
  c.dataset.path = testutil::fixture("imdb_toy.jsonl").string();
  c.num_samples = 50;
  c.batch_size = 16;
  c.seed_start = 42;
  c.seed_count = 5;
  return c;
}

EvalSet classify_data(const ExperimentConfig& c, const ModelConfig& mc) { return load_eval_set(c, mc); }

json without_timing(const ExperimentResult& r) {
  json j = r;
  j.erase("timing");
  return j;
}

}  // namespace

TEST(ExperimentConfig, JsonRoundTripAndDigest) {
  ExperimentConfig c = classify_config();
  c.faults = {parse_fault_spec("bitflip(layer=1,severity=0.1)"), parse_fault_spec("weight_corruption(rate=0.05)")};
  const ExperimentConfig back = json(c).get<ExperimentConfig>();
  EXPECT_EQ(back, c);
  EXPECT_EQ(config_digest(back), config_digest(c));
  EXPECT_EQ(config_digest(c).size(), 8u);
  c.seed_count = 6;
  EXPECT_NE(config_digest(back), config_digest(c));
}

TEST(ExperimentConfig, ValidateRejectsBadValues) {
  ExperimentConfig c = classify_config();
  c.seed_count = 0;
  EXPECT_THROW(c.validate(), InputError);
  c = classify_config();
  c.metrics = {"f1"};
  EXPECT_THROW(c.validate(), SpecParseError);
  c = classify_config();
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(LoadEvalSet, ClassifyAndLm) {
  const ExperimentConfig c = classify_config();
  const TransformerModel cls = toy::sentiment_classifier();
  const EvalSet set = load_eval_set(c, cls.config());
  EXPECT_EQ(set.examples(), 50u);
  EXPECT_EQ(set.batches.size(), 4u);

  ExperimentConfig lm = c;
  lm.dataset.path = testutil::fixture("wikitext_toy.txt").string();
  lm.dataset.task = Task::kLm;
  lm.num_samples = 5;
  const EvalSet lines = load_eval_set(lm, toy::small_lm_config(2));
  EXPECT_EQ(lines.examples(), 5u);
  EXPECT_EQ(lines.task, Task::kLm);

  ExperimentConfig bad = c;
  bad.dataset.tokenizer = "wordpiece";
  EXPECT_THROW((void)load_eval_set(bad, cls.config()), InputError);
}

TEST(Run, SeedRangeProducesOneCellPerSeed) {
  TransformerModel m = toy::sentiment_classifier();
  ExperimentConfig c = classify_config();
  c.seed_count = 30;
  c.faults = {parse_fault_spec("bitflip(layer=0,severity=0.05)")};
  FaultInjector inj(m);
  const ExperimentResult r = run(c, inj, classify_data(c, m.config()));
  ASSERT_EQ(r.faults.size(), 1u);
  ASSERT_EQ(r.faults[0].trials.size(), 30u);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(r.faults[0].trials[i].seed, 42 + i);
  EXPECT_TRUE(r.baseline_recheck_ok);
  EXPECT_TRUE(inj.verify_clean());
  EXPECT_EQ(r.faults[0].summary[0].stats.n, 30u);
}

TEST(Run, ZeroSeverityFaultMatchesBaselineExactly) {
  TransformerModel m = toy::sentiment_classifier();
  ExperimentConfig c = classify_config();
  c.faults = {BitFlip{std::nullopt, 0.0}, WeightCorruption{0, 0.0, SigmaMode::kTensorStd, 0.0},
              ActivationFault{3, ActivationKind::kClamp, 0.0, 1.0, 1.0}, HeadDropout{2, 0.0}};
  FaultInjector inj(m);
  const ExperimentResult r = run(c, inj, classify_data(c, m.config()));
  for (const auto& row : r.faults) {
    for (const auto& cell : row.trials) EXPECT_EQ(cell.metrics[0].value, r.baseline[0].value);
    EXPECT_FALSE(row.summary[0].stats.significant) << to_string(row.spec);
  }
}

TEST(Run, RepeatRunsAreIdenticalExceptTiming) {
  TransformerModel m = toy::sentiment_classifier();
  ExperimentConfig c = classify_config();
  c.faults = {parse_fault_spec("weight_corruption(layer=0,rate=0.3)"), parse_fault_spec("layer_fault(layer=2,severity=0.4)")};
  const EvalSet data = classify_data(c, m.config());
  FaultInjector inj(m);
  const ExperimentResult a = run(c, inj, data);
  const ExperimentResult b = run(c, inj, data);
  EXPECT_EQ(without_timing(a).dump(), without_timing(b).dump());
}

TEST(Run, ParallelWorkersMatchSequential) {
  TransformerModel m = toy::sentiment_classifier();
  ExperimentConfig c = classify_config();
  c.faults = {parse_fault_spec("weight_corruption(layer=all,rate=0.5)"), parse_fault_spec("head_dropout(layer=0,severity=0.5)")};
  const EvalSet data = classify_data(c, m.config());
  FaultInjector inj(m);
  const ExperimentResult seq = run(c, inj, data);
  c.workers = 3;
  const ExperimentResult par = run(c, inj, data);
  json a = without_timing(seq), b = without_timing(par);
  a["config"].erase("workers");
  b["config"].erase("workers");
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_TRUE(inj.verify_clean());
}

TEST(Run, FailingTrialsBecomeErrorCells) {
  TransformerModel m = toy::sentiment_classifier();
  ExperimentConfig c = classify_config();
  c.faults = {parse_fault_spec("head_dropout(layer=12,severity=0.5)")};
  FaultInjector inj(m);
  const ExperimentResult r = run(c, inj, classify_data(c, m.config()));
  for (const auto& cell : r.faults[0].trials) {
    EXPECT_FALSE(cell.error.empty());
    EXPECT_TRUE(cell.metrics.empty());
  }
  const SummaryStats& s = r.faults[0].summary[0].stats;
  EXPECT_EQ(s.n, 0u);
  EXPECT_EQ(s.n_errors, 5u);
  EXPECT_TRUE(inj.verify_clean());
}

TEST(Run, RejectsDirtyInjector) {
  TransformerModel m = toy::sentiment_classifier();
  ExperimentConfig c = classify_config();
  FaultInjector inj(m);
  Rng rng(1);
  inj.inject(LayerFault{0, 0.1}, rng);
  EXPECT_THROW((void)run(c, inj, classify_data(c, m.config())), Error);
  inj.revert_all();
}

TEST(SweepLayers, OneRowPerLayer) {
  TransformerModel m = toy::sentiment_classifier();
  ExperimentConfig c = classify_config();
  c.seed_count = 3;
  const EvalSet data = classify_data(c, m.config());
  FaultInjector inj(m);
  const FaultSpec tmpl = parse_fault_spec("weight_corruption(rate=0.05)");
  std::vector<std::size_t> layers(10);
  for (std::size_t i = 0; i < 10; ++i) layers[i] = i;
  const ExperimentResult r = sweep_layers(c, tmpl, layers, inj, data);
  ASSERT_EQ(r.faults.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(fault_layer(r.faults[i].spec), LayerScope{i});

  const ExperimentResult single = sweep_layers(c, tmpl, {4}, inj, data);
  ExperimentConfig direct = c;
  direct.faults = {with_layer(tmpl, 4)};
  EXPECT_EQ(without_timing(single).dump(), without_timing(run(direct, inj, data)).dump());

  const ExperimentResult none = sweep_layers(c, tmpl, {}, inj, data);
  EXPECT_TRUE(none.faults.empty());
  EXPECT_EQ(none.baseline.size(), 1u);
  EXPECT_THROW((void)sweep_layers(c, tmpl, {10}, inj, data), TargetingError);
}

TEST(Persist, WritesArtifactsAndRoundTrips) {
  testutil::TempDir dir;
  TransformerModel m = toy::sentiment_classifier();
  ExperimentConfig c = classify_config();
  c.metrics = {"accuracy", "latency(runs=1)"};
  c.faults = {parse_fault_spec("bitflip(layer=1,severity=0.1)"), parse_fault_spec("activation(layer=0,kind=noise,severity=0.3)")};
  FaultInjector inj(m);
  const ExperimentResult r = run(c, inj, classify_data(c, m.config()));
  const auto a = persist(r, dir.path());
  const auto b = persist(r, dir.path());
  EXPECT_NE(a, b);
  for (const char* f : {"results.json", "config.json", "summary.csv"}) EXPECT_TRUE(std::filesystem::exists(a / f)) << f;
  EXPECT_EQ(load_result(a), r);
  const std::string csv = testutil::read_file(a / "summary.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 2);
  EXPECT_EQ(json::parse(testutil::read_file(a / "config.json")).get<ExperimentConfig>(), c);
}

TEST(Persist, DirectoryNameCarriesTimestampAndDigest) {
  testutil::TempDir dir;
  ExperimentResult r;
  r.config = classify_config();
  const auto p = persist(r, dir.path());
  const std::string name = p.filename().string();
  ASSERT_GE(name.size(), 25u);
  EXPECT_EQ(name[8], '-');
  EXPECT_EQ(name[15], 'Z');
  EXPECT_EQ(name.substr(17, 8), config_digest(r.config));
}

TEST(LoadResult, CorruptFileNamesThePath) {
  testutil::TempDir dir;
  testutil::write_file(dir / "results.json", "{\"schema\": ");
  try {
    (void)load_result(dir.path());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("results.json"), std::string::npos);
  }
  EXPECT_THROW((void)load_result(dir / "missing"), DataError);
}

TEST(LoadResult, NanValuesRoundTripAsNull) {
  ExperimentResult r;
  r.config = classify_config();
  r.baseline = {MetricResult{"log_perplexity", 2.0, 10, {}, {}}};
  FaultRow row;
  row.spec = LayerFault{0, 1.0};
  TrialCell cell;
  cell.seed = 42;
  cell.metrics = {MetricResult{"log_perplexity", std::numeric_limits<double>::quiet_NaN(), 10, {}, "non-finite logits"}};
  row.trials.push_back(cell);
  row.summary.push_back({"log_perplexity", summarize(std::vector<double>{}, 2.0)});
  r.faults.push_back(row);
  const json j = r;
  EXPECT_TRUE(j["faults"][0]["trials"][0]["metrics"][0]["value"].is_null());
  const ExperimentResult back = j.get<ExperimentResult>();
  EXPECT_TRUE(std::isnan(back.faults[0].trials[0].metrics[0].value));
  EXPECT_EQ(back.faults[0].trials[0].metrics[0].nan_reason, "non-finite logits");
  EXPECT_EQ(json(back).dump(), j.dump());
}
