// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "faultlab/runner.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <limits>
#include <thread>

#include "faultlab/error.hpp"
#include "faultlab/hash.hpp"

namespace faultlab {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string utc_stamp(std::chrono::system_clock::time_point tp, const char* fmt) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, fmt, &tm);
  return buf;
}

json metric_to_json(const MetricResult& m) {
  json j{{"name", m.name}, {"value", number_or_null(m.value)}, {"count", m.count}, {"aux", m.aux}};
  if (!m.nan_reason.empty()) j["nan_reason"] = m.nan_reason;
  return j;
}

MetricResult metric_from_json(const json& j) {
  MetricResult m;
  m.name = j.at("name").get<std::string>();
  m.value = number_from(j.at("value"));
  m.count = j.at("count").get<std::size_t>();
  m.aux = j.at("aux").get<std::map<std::string, double>>();
  m.nan_reason = j.value("nan_reason", "");
  return m;
}

json stats_to_json(const SummaryStats& s) {
  return json{{"mean", number_or_null(s.mean)},
              {"std", number_or_null(s.std)},
              {"ci95_low", number_or_null(s.ci95_low)},
              {"ci95_high", number_or_null(s.ci95_high)},
              {"n", s.n},
              {"baseline", number_or_null(s.baseline)},
              {"significant", s.significant},
              {"n_nonfinite", s.n_nonfinite},
              {"n_errors", s.n_errors}};
}

SummaryStats stats_from_json(const json& j) {
  SummaryStats s;
  s.mean = number_from(j.at("mean"));
  s.std = number_from(j.at("std"));
  s.ci95_low = number_from(j.at("ci95_low"));
  s.ci95_high = number_from(j.at("ci95_high"));
  s.n = j.at("n").get<std::size_t>();
  s.baseline = number_from(j.at("baseline"));
  s.significant = j.at("significant").get<bool>();
  s.n_nonfinite = j.at("n_nonfinite").get<std::size_t>();
  s.n_errors = j.at("n_errors").get<std::size_t>();
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double v) { return std::isfinite(v) ? format_number(v) : "nan"; }

std::vector<std::unique_ptr<Metric>> build_metrics(const std::vector<std::string>& names) {
  std::vector<std::unique_ptr<Metric>> out;
  for (const auto& n : names) out.push_back(make_metric(n));
  return out;
}

TrialCell run_trial(FaultInjector& injector, const FaultSpec& spec, std::uint64_t seed,
                    const std::vector<std::unique_ptr<Metric>>& metrics, const EvalSet& data) {
  TrialCell cell;
  cell.seed = seed;
  Rng rng = Rng::derive(seed, to_string(spec));
  try {
    injector.inject(spec, rng);
    cell.affected = injector.active().back().affected;
    cell.metrics = evaluate_all(injector.model(), metrics, data);
  } catch (const Error& e) {
    cell.error = e.what();
    cell.metrics.clear();
  }
  injector.revert_all();
  if (!injector.verify_clean()) {
    throw Error("model integrity lost after trial " + to_string(spec) + " seed " + std::to_string(seed));
  }
  return cell;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seed_count < 1) throw InputError("seed count must be >= 1");
  if (num_samples < 1) throw InputError("num_samples must be >= 1");
  if (batch_size < 1) throw InputError("batch_size must be >= 1");
  if (workers < 1) throw InputError("workers must be >= 1");
  if (!(ci_z > 0.0)) throw InputError("ci_z must be > 0");
  for (const auto& f : faults) validate_fault_params(f);
  for (const auto& m : metrics) (void)make_metric(m);
}

void to_json(json& j, const ExperimentConfig& c) {
  json faults = json::array();
  for (const auto& f : c.faults) faults.push_back(to_string(f));
  j = json{{"faults", faults},
           {"metrics", c.metrics},
           {"model", c.model_path},
           {"dataset",
            {{"path", c.dataset.path},
             {"task", to_string(c.dataset.task)},
             {"tokenizer", c.dataset.tokenizer},
             {"vocab", c.dataset.vocab_path},
             {"merges", c.dataset.merges_path},
             {"max_tokens", c.dataset.max_tokens}}},
           {"batch_size", c.batch_size},
           {"num_samples", c.num_samples},
           {"seeds", {{"start", c.seed_start}, {"count", c.seed_count}}},
           {"subset_seed", c.subset_seed},
           {"workers", c.workers},
           {"output_root", c.output_root},
           {"ci_z", c.ci_z}};
}

void from_json(const json& j, ExperimentConfig& c) {
  c.faults.clear();
  for (const auto& f : j.at("faults")) c.faults.push_back(parse_fault_spec(f.get<std::string>()));
  c.metrics = j.at("metrics").get<std::vector<std::string>>();
  c.model_path = j.at("model").get<std::string>();
  const auto& d = j.at("dataset");
  c.dataset.path = d.at("path").get<std::string>();
  c.dataset.task = task_from_string(d.at("task").get<std::string>());
  c.dataset.tokenizer = d.at("tokenizer").get<std::string>();
  c.dataset.vocab_path = d.at("vocab").get<std::string>();
  c.dataset.merges_path = d.at("merges").get<std::string>();
  c.dataset.max_tokens = d.at("max_tokens").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.num_samples = j.at("num_samples").get<std::size_t>();
  c.seed_start = j.at("seeds").at("start").get<std::uint64_t>();
  c.seed_count = j.at("seeds").at("count").get<std::size_t>();
  c.subset_seed = j.at("subset_seed").get<std::uint64_t>();
  c.workers = j.at("workers").get<std::size_t>();
  c.output_root = j.at("output_root").get<std::string>();
  c.ci_z = j.at("ci_z").get<double>();
}

std::string config_digest(const ExperimentConfig& config) { return sha256_hex(json(config).dump()).substr(0, 8); }

const MetricSummary* ExperimentResult::find_summary(std::size_t fault, const std::string& metric) const {
  for (const auto& s : faults.at(fault).summary) {
    if (s.metric == metric) return &s;
  }
  return nullptr;
}

void to_json(json& j, const ExperimentResult& r) {
  json baseline = json::array();
  for (const auto& m : r.baseline) baseline.push_back(metric_to_json(m));
  json faults = json::array();
  for (const auto& row : r.faults) {
    json trials = json::array();
    for (const auto& cell : row.trials) {
      json t{{"seed", cell.seed}, {"affected", cell.affected}};
      if (cell.error.empty()) {
        json ms = json::array();
        for (const auto& m : cell.metrics) ms.push_back(metric_to_json(m));
        t["metrics"] = ms;
      } else {
        t["error"] = cell.error;
      }
      trials.push_back(t);
    }
    json summary = json::array();
    for (const auto& s : row.summary) {
      json sj = stats_to_json(s.stats);
      sj["metric"] = s.metric;
      summary.push_back(sj);
    }
    const LayerScope layer = fault_layer(row.spec);
    faults.push_back(json{{"spec", to_string(row.spec)},
                          {"layer", layer ? json(*layer) : json("all")},
                          {"trials", trials},
                          {"summary", summary}});
  }
  j = json{{"schema", r.schema},
           {"tool_version", r.tool_version},
           {"config", r.config},
           {"baseline", baseline},
           {"faults", faults},
           {"baseline_recheck_ok", r.baseline_recheck_ok},
           {"timing",
            {{"started_at", r.timing.started_at},
             {"finished_at", r.timing.finished_at},
             {"wall_seconds", r.timing.wall_seconds}}}};
}

void from_json(const json& j, ExperimentResult& r) {
  r.schema = j.at("schema").get<std::string>();
  if (r.schema != kResultsSchema) throw DataError("unsupported results schema '" + r.schema + "'");
  r.tool_version = j.at("tool_version").get<std::string>();
  r.config = j.at("config").get<ExperimentConfig>();
  r.baseline.clear();
  for (const auto& m : j.at("baseline")) r.baseline.push_back(metric_from_json(m));
  r.faults.clear();
  for (const auto& fj : j.at("faults")) {
    FaultRow row;
    row.spec = parse_fault_spec(fj.at("spec").get<std::string>());
    for (const auto& tj : fj.at("trials")) {
      TrialCell cell;
      cell.seed = tj.at("seed").get<std::uint64_t>();
      cell.affected = tj.at("affected").get<std::size_t>();
      if (tj.contains("error")) {
        cell.error = tj.at("error").get<std::string>();
      } else {
        for (const auto& m : tj.at("metrics")) cell.metrics.push_back(metric_from_json(m));
      }
      row.trials.push_back(std::move(cell));
    }
    for (const auto& sj : fj.at("summary")) row.summary.push_back({sj.at("metric").get<std::string>(), stats_from_json(sj)});
    r.faults.push_back(std::move(row));
  }
  r.baseline_recheck_ok = j.at("baseline_recheck_ok").get<bool>();
  const auto& t = j.at("timing");
  r.timing = {t.at("started_at").get<std::string>(), t.at("finished_at").get<std::string>(),
              t.at("wall_seconds").get<double>()};
}

EvalSet load_eval_set(const ExperimentConfig& config, const ModelConfig& model_config) {
  const auto& ref = config.dataset;
  const Tokenizer tok = ref.tokenizer == "bpe" ? Tokenizer::load_bpe(ref.vocab_path, ref.merges_path)
                        : ref.tokenizer == "byte"
                            ? Tokenizer::byte_level()
                            : throw InputError("unknown tokenizer '" + ref.tokenizer + "' (use byte or bpe)");
  if (tok.vocab_size() > model_config.vocab_size) {
    throw InputError("tokenizer vocabulary (" + std::to_string(tok.vocab_size()) + ") exceeds model vocab_size (" +
                     std::to_string(model_config.vocab_size) + ")");
  }
  const std::size_t max_tokens = std::min(ref.max_tokens, model_config.max_seq_len);
  if (ref.task == Task::kClassify) {
    const auto all = load_classification(ref.path);
    return batch(subset(all, config.num_samples, config.subset_seed), tok, config.batch_size, max_tokens);
  }
  const auto lm = load_lm_lines(ref.path, tok, max_tokens, config.num_samples);
  return batch(lm, config.batch_size, tok.pad_id());
}

ExperimentResult run(const ExperimentConfig& config, FaultInjector& injector, const EvalSet& data) {
  config.validate();
  if (!injector.verify_clean()) throw Error("run: injector is not clean before the experiment");
  const auto wall_start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.config = config;
  result.timing.started_at = utc_stamp(std::chrono::system_clock::now(), "%Y-%m-%dT%H:%M:%SZ");

  const auto metrics = build_metrics(config.metrics);
  bool timing = false;
  for (const auto& m : metrics) timing = timing || m->is_timing();
  result.baseline = evaluate_all(injector.model(), metrics, data);

  struct Trial {
    std::size_t fault;
    std::uint64_t seed;
  };
  std::vector<Trial> trials;
  for (std::size_t f = 0; f < config.faults.size(); ++f)
    for (std::size_t s = 0; s < config.seed_count; ++s) trials.push_back({f, config.seed_start + s});
  std::vector<TrialCell> cells(trials.size());

  const std::size_t workers = timing ? 1 : std::min<std::size_t>(config.workers, std::max<std::size_t>(trials.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < trials.size(); ++i) {
      cells[i] = run_trial(injector, config.faults[trials[i].fault], trials[i].seed, metrics, data);
    }
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          omp_set_num_threads(1);
          TransformerModel local = injector.model().clone();
          FaultInjector local_injector(local);
          for (std::size_t i = w; i < trials.size(); i += workers) {
            cells[i] = run_trial(local_injector, config.faults[trials[i].fault], trials[i].seed, metrics, data);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (std::size_t f = 0; f < config.faults.size(); ++f) {
    FaultRow row;
    row.spec = config.faults[f];
    for (std::size_t i = 0; i < trials.size(); ++i) {
      if (trials[i].fault == f) row.trials.push_back(std::move(cells[i]));
    }
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      std::vector<double> values;
      std::size_t errors = 0, nonfinite = 0;
      for (const auto& cell : row.trials) {
        if (!cell.error.empty()) {
          ++errors;
        } else if (!std::isfinite(cell.metrics[k].value)) {
          ++nonfinite;
        } else {
          values.push_back(cell.metrics[k].value);
        }
      }
      MetricSummary ms{result.baseline[k].name, summarize(values, result.baseline[k].value, config.ci_z)};
      ms.stats.n_errors = errors;
      ms.stats.n_nonfinite = nonfinite;
      row.summary.push_back(ms);
    }
    result.faults.push_back(std::move(row));
  }

  const auto recheck = evaluate_all(injector.model(), metrics, data);
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    if (metrics[k]->is_timing()) continue;
    const double a = recheck[k].value, b = result.baseline[k].value;
    if (!(a == b || (std::isnan(a) && std::isnan(b)))) {
      throw Error("baseline drifted during the run for metric '" + metrics[k]->name() + "'");
    }
  }
  result.baseline_recheck_ok = true;
  result.timing.finished_at = utc_stamp(std::chrono::system_clock::now(), "%Y-%m-%dT%H:%M:%SZ");
  result.timing.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return result;
}

ExperimentResult sweep_layers(ExperimentConfig config, const FaultSpec& fault_template,
                              const std::vector<std::size_t>& layers, FaultInjector& injector, const EvalSet& data) {
  config.faults.clear();
  for (auto layer : layers) {
    const FaultSpec spec = with_layer(fault_template, layer);
    validate_fault_spec(spec, injector.model().config());
    config.faults.push_back(spec);
  }
  return run(config, injector, data);
}

std::string summary_csv(const ExperimentResult& result) {
  std::string out = "fault,layer,metric,mean,std,ci95_low,ci95_high,n,baseline,significant\n";
  for (const auto& row : result.faults) {
    const LayerScope layer = fault_layer(row.spec);
    for (const auto& s : row.summary) {
      const auto& st = s.stats;
      out += csv_field(to_string(row.spec)) + "," + (layer ? std::to_string(*layer) : "all") + "," +
             csv_field(s.metric) + "," + csv_number(st.mean) + "," + csv_number(st.std) + "," +
             csv_number(st.ci95_low) + "," + csv_number(st.ci95_high) + "," + std::to_string(st.n) + "," +
             csv_number(st.baseline) + "," + (st.significant ? "true" : "false") + "\n";
    }
  }
  return out;
}

std::filesystem::path persist(const ExperimentResult& result, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error("cannot create output root " + root.string() + ": " + ec.message());
  const std::string base = utc_stamp(std::chrono::system_clock::now(), "%Y%m%d-%H%M%SZ") + "-" +
                           config_digest(result.config);
  fs::path dir;
  for (int suffix = 0; suffix < 100; ++suffix) {
    char tail[8] = "";
    if (suffix) std::snprintf(tail, sizeof tail, "-%02d", suffix);
    dir = root / (base + tail);
    if (fs::create_directory(dir, ec)) break;
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
    dir.clear();
  }
  if (dir.empty()) throw Error("too many result directories named " + base);

  auto write = [&](const char* name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error("failed writing " + (dir / name).string());
  };
  write("results.json", json(result).dump(2) + "\n");
  write("config.json", json(result.config).dump(2) + "\n");
  write("summary.csv", summary_csv(result));
  return dir;
}

ExperimentResult load_result(const std::filesystem::path& dir) {
  const auto file = dir / "results.json";
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  try {
    return json::parse(in).get<ExperimentResult>();
  } catch (const json::exception& e) {
    throw DataError("corrupt " + file.string() + ": " + e.what());
  } catch (const SpecParseError& e) {
    throw DataError("corrupt " + file.string() + ": " + e.what());
  }
}

}  // namespace faultlab
