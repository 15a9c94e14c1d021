// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "faultlab/data.hpp"
#include "faultlab/fault_spec.hpp"
#include "faultlab/injector.hpp"
#include "faultlab/metrics.hpp"
#include "faultlab/stats.hpp"

namespace faultlab {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kResultsSchema = "faultlab.results/1";

struct DatasetRef {
  std::string path;
  Task task = Task::kClassify;
  std::string tokenizer = "byte";  // "byte" or "bpe"
  std::string vocab_path;          // bpe only
  std::string merges_path;         // bpe only
  std::size_t max_tokens = 32;
  friend bool operator==(const DatasetRef&, const DatasetRef&) = default;
};

struct ExperimentConfig {
  std::vector<FaultSpec> faults;
  std::vector<std::string> metrics;
  std::string model_path;
  DatasetRef dataset;
  std::size_t batch_size = 16;
  std::size_t num_samples = 50;
  std::uint64_t seed_start = 42;
  std::size_t seed_count = 30;
  /// Seed of the classification subset draw; shared by baseline and all trials.
  std::uint64_t subset_seed = 42;
  /// Worker threads for trials; each owns a model clone. 1 = sequential.
  std::size_t workers = 1;
  std::string output_root;
  double ci_z = kNormalZ95;

  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// First 8 hex digits of SHA-256 over the compact config JSON.
std::string config_digest(const ExperimentConfig& config);

struct TrialCell {
  std::uint64_t seed = 0;
  std::vector<MetricResult> metrics;
  std::size_t affected = 0;
  std::string error;  // nonempty if the trial failed
  friend bool operator==(const TrialCell&, const TrialCell&) = default;
};

struct MetricSummary {
  std::string metric;
  SummaryStats stats;
  friend bool operator==(const MetricSummary&, const MetricSummary&) = default;
};

struct FaultRow {
  FaultSpec spec;
  std::vector<TrialCell> trials;
  std::vector<MetricSummary> summary;  // metric order
  friend bool operator==(const FaultRow&, const FaultRow&) = default;
};

struct RunTiming {
  std::string started_at;
  std::string finished_at;
  double wall_seconds = 0.0;
  friend bool operator==(const RunTiming&, const RunTiming&) = default;
};

struct ExperimentResult {
  std::string schema = kResultsSchema;
  std::string tool_version = kToolVersion;
  ExperimentConfig config;
  std::vector<MetricResult> baseline;
  std::vector<FaultRow> faults;
  bool baseline_recheck_ok = false;
  RunTiming timing;

  const MetricSummary* find_summary(std::size_t fault, const std::string& metric) const;
  friend bool operator==(const ExperimentResult&, const ExperimentResult&) = default;
};

void to_json(nlohmann::json& j, const ExperimentResult& r);
void from_json(const nlohmann::json& j, ExperimentResult& r);

/// Loads, subsets (classification, keyed by subset_seed) or truncates (LM, first
/// num_samples lines) and batches the configured dataset.
EvalSet load_eval_set(const ExperimentConfig& config, const ModelConfig& model_config);

/// Baseline, then every fault x seed trial (inject, evaluate, revert_all,
/// verify_clean), then per-fault statistics and a final baseline recheck.
/// A failing trial becomes an error cell; losing model integrity throws.
ExperimentResult run(const ExperimentConfig& config, FaultInjector& injector, const EvalSet& data);

/// One copy of `fault_template` per layer index, then run().
ExperimentResult sweep_layers(ExperimentConfig config, const FaultSpec& fault_template,
                              const std::vector<std::size_t>& layers, FaultInjector& injector, const EvalSet& data);

/// Writes results.json, config.json and summary.csv into
/// <root>/<YYYYMMDD-HHMMSSZ>-<digest>[-NN]/ and returns that directory.
std::filesystem::path persist(const ExperimentResult& result, const std::filesystem::path& root);

/// summary.csv content: fault,layer,metric,mean,std,ci95_low,ci95_high,n,baseline,significant.
std::string summary_csv(const ExperimentResult& result);

/// Reads <dir>/results.json. Throws DataError naming the file on failure.
ExperimentResult load_result(const std::filesystem::path& dir);

}  // namespace faultlab
