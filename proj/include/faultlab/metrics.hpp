// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "faultlab/data.hpp"
#include "faultlab/model.hpp"

namespace faultlab {

struct MetricResult {
  std::string name;
  double value = 0.0;
  std::size_t count = 0;
  std::map<std::string, double> aux;
  /// Set when value is NaN on purpose (e.g. a fault produced non-finite logits).
  std::string nan_reason;

  friend bool operator==(const MetricResult&, const MetricResult&) = default;
};

/// Evaluation metric over an EvalSet. Subclass to add custom metrics.
class Metric {
 public:
  virtual ~Metric() = default;
  /// Canonical spec, e.g. "accuracy" or "latency(runs=3)".
  virtual std::string name() const = 0;
  virtual MetricResult evaluate(const TransformerModel& model, const EvalSet& data) const = 0;
  /// Wall-clock metrics are excluded from determinism checks and force sequential trials.
  virtual bool is_timing() const { return false; }
};

/// Fraction of examples whose argmax logit (ties -> lowest class) equals the
/// label. Rows with non-finite logits count as wrong; aux["nonfinite_rows"].
class Accuracy final : public Metric {
 public:
  std::string name() const override { return "accuracy"; }
  MetricResult evaluate(const TransformerModel& model, const EvalSet& data) const override;
};

/// Token-averaged next-token NLL (log_scale) or its exponential.
class Perplexity final : public Metric {
 public:
  explicit Perplexity(bool log_scale) : log_scale_(log_scale) {}
  std::string name() const override { return log_scale_ ? "log_perplexity" : "perplexity"; }
  MetricResult evaluate(const TransformerModel& model, const EvalSet& data) const override;

 private:
  bool log_scale_;
};

/// Mean wall-clock seconds of a full forward sweep over the data, after one
/// untimed warmup. aux holds "run_0".."run_{n-1}".
class Latency final : public Metric {
 public:
  explicit Latency(std::size_t num_runs = 3);
  std::string name() const override;
  MetricResult evaluate(const TransformerModel& model, const EvalSet& data) const override;
  bool is_timing() const override { return true; }
  std::size_t num_runs() const { return num_runs_; }

 private:
  std::size_t num_runs_;
};

/// "accuracy", "perplexity", "log_perplexity", "latency" or "latency(runs=N)".
std::unique_ptr<Metric> make_metric(const std::string& spec);

/// Results in metric order; each metric sees the same batches in the same
/// order. Errors are rethrown with the metric name prefixed.
std::vector<MetricResult> evaluate_all(const TransformerModel& model,
                                       const std::vector<std::unique_ptr<Metric>>& metrics, const EvalSet& data);

/// -log softmax(row)[target] in double. Returns NaN if any entry of the row is non-finite.
double token_nll(const float* row, std::size_t vocab, std::size_t target);

}  // namespace faultlab
