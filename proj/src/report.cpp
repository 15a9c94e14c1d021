// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "faultlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "faultlab/error.hpp"

namespace faultlab {

namespace {

std::string num(double v) { return std::isfinite(v) ? format_number(v) : "nan"; }

std::string fixed(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream ss;
  ss.precision(4);
  ss << std::fixed << v;
  return ss.str();
}

std::string layer_text(const FaultSpec& spec) {
  const LayerScope layer = fault_layer(spec);
  return layer ? std::to_string(*layer) : "all";
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> metric_names(const ExperimentResult& r) {
  std::vector<std::string> out;
  for (const auto& m : r.baseline) out.push_back(m.name);
  return out;
}

const SummaryStats* summary_of(const FaultRow& row, const std::string& metric) {
  for (const auto& s : row.summary) {
    if (s.metric == metric) return &s.stats;
  }
  return nullptr;
}

}  // namespace

std::string emit_plot_csv(const ExperimentResult& result, const std::string& metric) {
  const auto names = metric_names(result);
  if (std::find(names.begin(), names.end(), metric) == names.end()) {
    std::string known;
    for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
    throw InputError("metric '" + metric + "' not in results (recorded: " + known + ")");
  }
  std::string out = "fault,x,y,yerr_low,yerr_high,std,n,baseline\n";
  for (const auto& row : result.faults) {
    const SummaryStats* s = summary_of(row, metric);
    if (!s) continue;
    out += csv_quote(to_string(row.spec)) + "," + layer_text(row.spec) + "," + num(s->mean) + "," +
           num(s->mean - s->ci95_low) + "," + num(s->ci95_high - s->mean) + "," + num(s->std) + "," +
           std::to_string(s->n) + "," + num(s->baseline) + "\n";
  }
  return out;
}

std::string emit_markdown_summary(const ExperimentResult& result) {
  const auto& c = result.config;
  std::ostringstream md;
  md << "# Fault sweep results\n\n";
  md << "- model: `" << c.model_path << "`\n";
  md << "- dataset: `" << c.dataset.path << "` (" << to_string(c.dataset.task) << ", " << c.dataset.tokenizer
     << " tokenizer)\n";
  md << "- samples: " << c.num_samples << ", batch size " << c.batch_size << "\n";
  md << "- seeds: " << c.seed_start << ".." << (c.seed_start + c.seed_count - 1) << " (" << c.seed_count << ")\n";
  md << "- tool version: " << result.tool_version << ", started " << result.timing.started_at << ", "
     << fixed(result.timing.wall_seconds) << " s\n";
  md << "- baseline recheck: " << (result.baseline_recheck_ok ? "ok" : "FAILED") << "\n";

  for (std::size_t k = 0; k < result.baseline.size(); ++k) {
    const auto& metric = result.baseline[k].name;
    md << "\n## " << metric << "\n\n";
    md << "| fault | layer | mean | std | 95% CI | n | errors | sig |\n";
    md << "|---|---|---|---|---|---|---|---|\n";
    md << "| baseline | - | " << fixed(result.baseline[k].value) << " | - | - | 1 | 0 | |\n";
    for (const auto& row : result.faults) {
      const SummaryStats* s = summary_of(row, metric);
      if (!s) continue;
      md << "| `" << to_string(row.spec) << "` | " << layer_text(row.spec) << " | " << fixed(s->mean) << " | "
         << fixed(s->std) << " | [" << fixed(s->ci95_low) << ", " << fixed(s->ci95_high) << "] | " << s->n << " | "
         << s->n_errors << " | " << (s->significant ? "*" : "") << " |\n";
    }
  }
  md << "\n`*` marks faults whose confidence interval excludes the baseline.\n";
  return md.str();
}

std::string compare(const ExperimentResult& a, const ExperimentResult& b) {
  const auto ma = metric_names(a), mb = metric_names(b);
  if (std::set<std::string>(ma.begin(), ma.end()) != std::set<std::string>(mb.begin(), mb.end())) {
    throw InputError("cannot compare runs with different metric sets");
  }
  std::map<std::string, const FaultRow*> rows_b;
  for (const auto& row : b.faults) rows_b[to_string(row.spec)] = &row;

  std::ostringstream md;
  md << "# Comparison\n\n";
  std::set<std::string> matched;
  for (const auto& metric : ma) {
    md << "## " << metric << "\n\n";
    md << "| fault | mean A | mean B | delta | sig A | sig B | change |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const auto& row : a.faults) {
      const std::string key = to_string(row.spec);
      const auto it = rows_b.find(key);
      if (it == rows_b.end()) continue;
      matched.insert(key);
      const SummaryStats* sa = summary_of(row, metric);
      const SummaryStats* sb = summary_of(*it->second, metric);
      if (!sa || !sb) continue;
      md << "| `" << key << "` | " << fixed(sa->mean) << " | " << fixed(sb->mean) << " | "
         << fixed(sb->mean - sa->mean) << " | " << (sa->significant ? "*" : "") << " | "
         << (sb->significant ? "*" : "") << " | " << (sa->significant != sb->significant ? "significance changed" : "")
         << " |\n";
    }
    md << "\n";
  }
  std::vector<std::string> only_a, only_b;
  for (const auto& row : a.faults) {
    if (!matched.count(to_string(row.spec))) only_a.push_back(to_string(row.spec));
  }
  for (const auto& row : b.faults) {
    if (!matched.count(to_string(row.spec))) only_b.push_back(to_string(row.spec));
  }
  if (!only_a.empty() || !only_b.empty()) {
    md << "## Unmatched\n\n";
    for (const auto& s : only_a) md << "- only in A: `" << s << "`\n";
    for (const auto& s : only_b) md << "- only in B: `" << s << "`\n";
  }
  return md.str();
}

}  // namespace faultlab
