// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "faultlab/cli.hpp"

#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "faultlab/checkpoint.hpp"
#include "faultlab/error.hpp"
#include "faultlab/report.hpp"
#include "faultlab/runner.hpp"

namespace faultlab::cli {

namespace {

// Marks the pipeline stage in error messages.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, int code, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)), code_(code) {}
  const std::string& stage() const { return stage_; }
  int code() const { return code_; }

 private:
  std::string stage_;
  int code_;
};

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SpecParseError*>(&e) || dynamic_cast<const InputError*>(&e) ||
      dynamic_cast<const TargetingError*>(&e)) {
    return kExitUsage;
  }
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const CheckpointError*>(&e) ||
      dynamic_cast<const StructureError*>(&e)) {
    return kExitData;
  }
  return kExitRuntime;
}

template <typename F>
auto stage(const std::string& name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const SpecParseError& e) {
    throw StageError(name, kExitUsage, std::string(e.what()) + " (at '" + e.token() + "')");
  } catch (const std::exception& e) {
    throw StageError(name, exit_code_for(e), e.what());
  }
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size() || text.empty() || text[0] == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw SpecParseError(what + ": expected a non-negative integer", text);
  }
}

/// "0-9", "0,2,5" or combinations such as "0-3,7".
std::vector<std::size_t> parse_layers(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      out.push_back(parse_u64(part, "--layers"));
      continue;
    }
    const auto lo = parse_u64(part.substr(0, dash), "--layers");
    const auto hi = parse_u64(part.substr(dash + 1), "--layers");
    if (hi < lo) throw SpecParseError("--layers: descending range", part);
    for (auto l = lo; l <= hi; ++l) out.push_back(l);
  }
  if (out.empty()) throw SpecParseError("--layers: empty layer list", text);
  return out;
}

std::pair<std::uint64_t, std::size_t> parse_seeds(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw SpecParseError("--seeds: expected start:count", text);
  return {parse_u64(text.substr(0, colon), "--seeds"), parse_u64(text.substr(colon + 1), "--seeds")};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct CommonFlags {
  std::string model;
  std::string dataset;
  std::string task;
  std::string metrics;
  std::size_t batch_size = 16;
  std::size_t num_samples = 50;
  std::uint64_t subset_seed = 42;
  std::string tokenizer = "byte";
  std::string vocab;
  std::string merges;
  std::size_t max_tokens = 32;
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--model", f.model, "Checkpoint file (.fckpt)")->required();
  app->add_option("--dataset", f.dataset, "Dataset file (.jsonl/.csv for classify, text lines for lm)")->required();
  app->add_option("--task", f.task, "classify or lm (default: from the model architecture)")
      ->check(CLI::IsMember({"classify", "lm"}));
  app->add_option("--metrics", f.metrics, "Comma-separated metrics (default accuracy or log_perplexity)");
  app->add_option("--batch-size", f.batch_size, "Examples per batch")->capture_default_str();
  app->add_option("--num-samples", f.num_samples, "Examples evaluated per trial")->capture_default_str();
  app->add_option("--subset-seed", f.subset_seed, "Seed of the classification subset draw")->capture_default_str();
  app->add_option("--tokenizer", f.tokenizer, "byte or bpe")->check(CLI::IsMember({"byte", "bpe"}))->capture_default_str();
  app->add_option("--vocab", f.vocab, "BPE vocabulary file");
  app->add_option("--merges", f.merges, "BPE merges file");
  app->add_option("--max-tokens", f.max_tokens, "Truncation length per example")->capture_default_str();
  app->add_option("--out", f.out, "Output root (default: $FAULTLAB_OUT or ./results)");
  app->add_option("--threads", f.threads, "OpenMP threads per forward pass (0 = runtime default)");
}

ExperimentConfig base_config(const CommonFlags& f, const ModelConfig& model_config) {
  ExperimentConfig c;
  c.model_path = f.model;
  c.dataset.path = f.dataset;
  c.dataset.task = f.task.empty() ? (model_config.arch == Arch::kClassifier ? Task::kClassify : Task::kLm)
                                  : task_from_string(f.task);
  c.dataset.tokenizer = f.tokenizer;
  c.dataset.vocab_path = f.vocab;
  c.dataset.merges_path = f.merges;
  c.dataset.max_tokens = f.max_tokens;
  c.metrics = f.metrics.empty() ? std::vector<std::string>{c.dataset.task == Task::kClassify ? "accuracy"
                                                                                              : "log_perplexity"}
                                : split_list(f.metrics);
  c.batch_size = f.batch_size;
  c.num_samples = f.num_samples;
  c.subset_seed = f.subset_seed;
  if (!f.out.empty()) {
    c.output_root = f.out;
  } else if (const char* env = std::getenv("FAULTLAB_OUT"); env && *env) {
    c.output_root = env;
  } else {
    c.output_root = "results";
  }
  return c;
}

struct RunFlags {
  CommonFlags common;
  std::vector<std::string> faults;
  std::string layers;
  std::string seeds = "42:30";
  std::size_t workers = 1;
};

int cmd_run(const RunFlags& f, bool baseline_only, std::ostream& out) {
  if (f.common.threads > 0) omp_set_num_threads(f.common.threads);
  ExperimentConfig config;
  std::vector<std::size_t> layers;
  if (!baseline_only) {
    stage("parse flags", [&] {
      for (const auto& text : f.faults) config.faults.push_back(parse_fault_spec(text));
      if (!f.layers.empty()) layers = parse_layers(f.layers);
      const auto [start, count] = parse_seeds(f.seeds);
      config.seed_start = start;
      config.seed_count = count;
      return 0;
    });
  }
  TransformerModel model = stage("load model", [&] { return load_model(f.common.model); });
  const auto faults = config.faults;
  const auto seed_start = config.seed_start;
  const auto seed_count = config.seed_count;
  config = stage("parse flags", [&] { return base_config(f.common, model.config()); });
  config.seed_start = seed_start;
  config.seed_count = seed_count;
  config.workers = f.workers;
  if (baseline_only) config.seed_count = 1;

  stage("validate faults", [&] {
    for (const auto& fault : faults) {
      if (layers.empty()) {
        validate_fault_spec(fault, model.config());
        config.faults.push_back(fault);
        continue;
      }
      for (auto layer : layers) {
        const FaultSpec spec = with_layer(fault, layer);
        validate_fault_spec(spec, model.config());
        config.faults.push_back(spec);
      }
    }
    config.validate();
    return 0;
  });
  const EvalSet data = stage("load dataset", [&] { return load_eval_set(config, model.config()); });
  FaultInjector injector(model);
  const ExperimentResult result = stage("run", [&] { return run(config, injector, data); });
  const auto dir = stage("persist", [&] { return persist(result, config.output_root); });
  if (baseline_only) {
    for (const auto& m : result.baseline) out << m.name << " " << format_number(m.value) << "\n";
  }
  out << dir.string() << "\n";
  return kExitOk;
}

struct ReportFlags {
  std::string in;
  std::string format = "md";
  std::string metric;
  std::string compare_dir;
  std::string out;
};

int cmd_report(const ReportFlags& f, std::ostream& out) {
  const ExperimentResult a = stage("load results", [&] { return load_result(f.in); });
  std::string text;
  if (!f.compare_dir.empty()) {
    const ExperimentResult b = stage("load results", [&] { return load_result(f.compare_dir); });
    text = stage("report", [&] { return compare(a, b); });
  } else if (f.format == "csv") {
    text = stage("report", [&] {
      if (a.baseline.empty()) throw InputError("results contain no metrics");
      return emit_plot_csv(a, f.metric.empty() ? a.baseline.front().name : f.metric);
    });
  } else {
    text = emit_markdown_summary(a);
  }
  if (f.out.empty()) {
    out << text;
  } else {
    stage("write report", [&] {
      std::ofstream file(f.out, std::ios::binary | std::ios::trunc);
      file << text;
      if (!file) throw Error("cannot write " + f.out);
      return 0;
    });
  }
  return kExitOk;
}

int cmd_list_faults(std::ostream& out) {
  for (const auto& info : fault_catalog()) {
    out << info.name << "\n  grammar:  " << info.grammar << "\n  severity: " << info.severity << "\n";
  }
  return kExitOk;
}

int cmd_validate(const std::string& path, std::ostream& out) {
  const ValidationReport report = validate_checkpoint(path);
  for (const auto& f : report.findings) out << to_string(f.kind) << ": " << f.message << "\n";
  if (!report.ok()) return kExitData;
  out << "ok\n";
  return kExitOk;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"faultlab: fault injection experiments on transformer checkpoints"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  RunFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "Run a fault sweep and persist the results");
  add_common(run_cmd, run_flags.common);
  run_cmd->add_option("--fault", run_flags.faults, "Fault spec, repeatable, e.g. bitflip(layer=0,severity=0.05)")
      ->required()
      ->allow_extra_args(false);
  run_cmd->add_option("--layers", run_flags.layers, "Replicate each fault over layers, e.g. 0-9 or 0,2,5");
  run_cmd->add_option("--seeds", run_flags.seeds, "Seed range start:count")->capture_default_str();
  run_cmd->add_option("--workers", run_flags.workers, "Parallel trial workers")->capture_default_str();

  RunFlags baseline_flags;
  CLI::App* baseline_cmd = app.add_subcommand("baseline", "Evaluate without faults and persist the result");
  add_common(baseline_cmd, baseline_flags.common);

  ReportFlags report_flags;
  CLI::App* report_cmd = app.add_subcommand("report", "Render a persisted result");
  report_cmd->add_option("--in", report_flags.in, "Result directory")->required();
  report_cmd->add_option("--format", report_flags.format, "csv or md")
      ->check(CLI::IsMember({"csv", "md"}))
      ->capture_default_str();
  report_cmd->add_option("--metric", report_flags.metric, "Metric for csv output (default: first)");
  report_cmd->add_option("--compare", report_flags.compare_dir, "Second result directory to diff against --in");
  report_cmd->add_option("--out", report_flags.out, "Write to a file instead of stdout");

  CLI::App* list_cmd = app.add_subcommand("list-faults", "Describe every fault variant");

  std::string validate_path;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a checkpoint header against the file");
  validate_cmd->add_option("checkpoint", validate_path, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    err << "run 'faultlab --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_flags, false, out);
    if (baseline_cmd->parsed()) return cmd_run(baseline_flags, true, out);
    if (report_cmd->parsed()) return cmd_report(report_flags, out);
    if (list_cmd->parsed()) return cmd_list_faults(out);
    if (validate_cmd->parsed()) return stage("validate", [&] { return cmd_validate(validate_path, out); });
  } catch (const StageError& e) {
    err << (e.code() == kExitUsage ? "usage error" : "error") << " [" << e.stage() << "]: " << e.what() << "\n";
    return e.code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace faultlab::cli
