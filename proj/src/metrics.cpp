// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "faultlab/metrics.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "faultlab/error.hpp"
#include "faultlab/fault_spec.hpp"

namespace faultlab {

double token_nll(const float* row, std::size_t vocab, std::size_t target) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < vocab; ++v) {
    if (!std::isfinite(row[v])) return std::numeric_limits<double>::quiet_NaN();
    mx = std::max(mx, static_cast<double>(row[v]));
  }
  double sum = 0.0;
  for (std::size_t v = 0; v < vocab; ++v) sum += std::exp(row[v] - mx);
  return mx + std::log(sum) - row[target];
}

MetricResult Accuracy::evaluate(const TransformerModel& model, const EvalSet& data) const {
  if (data.task != Task::kClassify) throw InputError("accuracy needs a classification dataset");
  const std::size_t C = model.config().n_classes;
  std::size_t correct = 0, total = 0, nonfinite = 0;
  for (const auto& b : data.batches) {
    for (auto label : b.labels) {
      if (label < 0 || static_cast<std::size_t>(label) >= C) {
        throw InputError("label " + std::to_string(label) + " out of range for " + std::to_string(C) + " classes");
      }
    }
    const Tensor logits = model.forward_classify(b.tokens);
    for (std::size_t i = 0; i < b.tokens.batch; ++i) {
      const float* row = logits.raw() + i * C;
      bool finite = true;
      std::size_t best = 0;
      for (std::size_t c = 0; c < C; ++c) {
        if (!std::isfinite(row[c])) finite = false;
        if (row[c] > row[best]) best = c;
      }
      ++total;
      if (!finite) {
        ++nonfinite;
        continue;
      }
      if (best == static_cast<std::size_t>(b.labels[i])) ++correct;
    }
  }
  if (total == 0) throw DataError("accuracy: empty dataset");
  MetricResult r{name(), static_cast<double>(correct) / static_cast<double>(total), total, {}, {}};
  if (nonfinite) r.aux["nonfinite_rows"] = static_cast<double>(nonfinite);
  return r;
}

MetricResult Perplexity::evaluate(const TransformerModel& model, const EvalSet& data) const {
  if (data.task != Task::kLm) throw InputError(name() + " needs a language-model dataset");
  const std::size_t V = model.config().vocab_size;
  double total_nll = 0.0;
  std::size_t tokens = 0, skipped = 0;
  bool nonfinite = false;
  for (const auto& b : data.batches) {
    const Tensor logits = model.forward_logits(b.tokens);
    const std::size_t T = b.tokens.seq;
    for (std::size_t s = 0; s < b.tokens.batch; ++s) {
      const std::size_t len = b.tokens.lengths[s];
      if (len < 2) {
        ++skipped;
        continue;
      }
      for (std::size_t t = 0; t + 1 < len; ++t) {
        const auto target = static_cast<std::size_t>(b.tokens.at(s, t + 1));
        const double nll = token_nll(logits.raw() + (s * T + t) * V, V, target);
        if (std::isnan(nll)) nonfinite = true;
        total_nll += nll;
        ++tokens;
      }
    }
  }
  if (tokens == 0) throw DataError(name() + ": empty dataset");
  MetricResult r{name(), 0.0, tokens, {}, {}};
  if (skipped) r.aux["skipped_sequences"] = static_cast<double>(skipped);
  if (nonfinite) {
    r.value = std::numeric_limits<double>::quiet_NaN();
    r.nan_reason = "non-finite logits";
    return r;
  }
  const double mean = total_nll / static_cast<double>(tokens);
  r.value = log_scale_ ? mean : std::exp(mean);
  return r;
}

Latency::Latency(std::size_t num_runs) : num_runs_(num_runs) {
  if (num_runs_ < 1) throw InputError("latency: num_runs must be >= 1");
}

std::string Latency::name() const { return "latency(runs=" + std::to_string(num_runs_) + ")"; }

MetricResult Latency::evaluate(const TransformerModel& model, const EvalSet& data) const {
  auto sweep = [&] {
    for (const auto& b : data.batches) {
      if (data.task == Task::kClassify) {
        (void)model.forward_classify(b.tokens);
      } else {
        (void)model.forward_logits(b.tokens);
      }
    }
  };
  sweep();  // warmup
  MetricResult r{name(), 0.0, data.examples(), {}, {}};
  double sum = 0.0;
  for (std::size_t i = 0; i < num_runs_; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    sweep();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // steady_clock can report 0 for a sub-tick sweep; clamp to one tick.
    const double secs = dt > 0.0 ? dt : std::chrono::duration<double>(std::chrono::steady_clock::duration(1)).count();
    r.aux["run_" + std::to_string(i)] = secs;
    sum += secs;
  }
  r.value = sum / static_cast<double>(num_runs_);
  if (r.count == 0) throw DataError("latency: empty dataset");
  return r;
}

std::unique_ptr<Metric> make_metric(const std::string& spec) {
  const CallExpr call = parse_call(spec, true);
  if (call.name == "accuracy" && call.args.empty()) return std::make_unique<Accuracy>();
  if (call.name == "perplexity" && call.args.empty()) return std::make_unique<Perplexity>(false);
  if (call.name == "log_perplexity" && call.args.empty()) return std::make_unique<Perplexity>(true);
  if (call.name == "latency") {
    std::size_t runs = 3;
    for (const auto& [k, v] : call.args) {
      if (k != "runs" && k != "num_runs") throw SpecParseError("latency: unknown parameter '" + k + "'", k);
      try {
        std::size_t used = 0;
        runs = std::stoul(v, &used);
        if (used != v.size() || runs < 1) throw std::invalid_argument(v);
      } catch (const std::logic_error&) {
        throw SpecParseError("latency: runs must be a positive integer", v);
      }
    }
    return std::make_unique<Latency>(runs);
  }
  throw SpecParseError("unknown metric '" + spec + "'", spec);
}

std::vector<MetricResult> evaluate_all(const TransformerModel& model,
                                       const std::vector<std::unique_ptr<Metric>>& metrics, const EvalSet& data) {
  std::vector<MetricResult> out;
  out.reserve(metrics.size());
  for (const auto& m : metrics) {
    try {
      out.push_back(m->evaluate(model, data));
    } catch (const DataError& e) {
      throw DataError("metric '" + m->name() + "': " + e.what());
    } catch (const Error& e) {
      throw Error("metric '" + m->name() + "': " + e.what());
    }
  }
  return out;
}

}  // namespace faultlab
