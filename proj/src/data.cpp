// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "faultlab/data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "faultlab/error.hpp"
#include "faultlab/rng.hpp"

namespace faultlab {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n\v\f");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\v\f");
  return s.substr(b, e - b + 1);
}

std::int32_t parse_label(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used != text.size() || v < 0 || v > INT32_MAX) throw std::invalid_argument("label");
    return static_cast<std::int32_t>(v);
  } catch (const std::logic_error&) {
    throw DataError("label '" + text + "' is not a non-negative integer", line);
  }
}

ClassificationDataset parse_jsonl(const std::string& content) {
  ClassificationDataset ds;
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed JSON: ") + e.what(), lineno);
    }
    if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
      throw DataError("record needs a string \"text\"", lineno);
    }
    if (!j.contains("label") || !j["label"].is_number_integer() || j["label"].get<long long>() < 0) {
      throw DataError("record needs a non-negative integer \"label\"", lineno);
    }
    ClassificationRecord r{j["text"].get<std::string>(), j["label"].get<std::int32_t>()};
    if (r.text.empty()) throw DataError("empty text", lineno);
    ds.records.push_back(std::move(r));
  }
  return ds;
}

// Minimal RFC 4180 reader: quoted fields may contain commas, doubled quotes and newlines.
struct CsvRow {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

std::vector<CsvRow> parse_csv_rows(const std::string& content) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false, field_started = false;
  std::size_t line = 1;
  row.line = 1;
  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.fields.size() == 1 && row.fields[0].empty())) rows.push_back(std::move(row));
    row = CsvRow{};
    row.line = line;
  };
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      ++line;
      end_row();
    } else if (c == '\r') {
      // tolerated before \n
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw DataError("unterminated quoted field", row.line);
  if (!field.empty() || !row.fields.empty()) end_row();
  return rows;
}

ClassificationDataset parse_csv(const std::string& content) {
  const auto rows = parse_csv_rows(content);
  if (rows.empty()) throw DataError("CSV file has no header", 1);
  const auto& header = rows[0].fields;
  const auto text_col = std::find(header.begin(), header.end(), "text") - header.begin();
  const auto label_col = std::find(header.begin(), header.end(), "label") - header.begin();
  if (text_col == static_cast<long>(header.size()) || label_col == static_cast<long>(header.size())) {
    throw DataError("CSV header must contain text,label", rows[0].line);
  }
  ClassificationDataset ds;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    if (f.size() != header.size()) {
      throw DataError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()),
                      rows[r].line);
    }
    ClassificationRecord rec{f[text_col], parse_label(trim(f[label_col]), rows[r].line)};
    if (rec.text.empty()) throw DataError("empty text", rows[r].line);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace

ClassificationDataset load_classification(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  const std::string ext = path.extension().string();
  if (ext == ".csv") return parse_csv(content);
  if (ext == ".jsonl" || ext == ".json") return parse_jsonl(content);
  throw DataError("unsupported dataset extension '" + ext + "' (use .jsonl or .csv)");
}

LMDataset load_lm_lines(const std::filesystem::path& path, const Tokenizer& tokenizer, std::size_t max_tokens,
                        std::size_t max_lines) {
  if (max_tokens < 2) throw DataError("max_tokens must be >= 2");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  LMDataset ds;
  std::string line;
  std::size_t taken = 0;
  while (taken < max_lines && std::getline(in, line)) {
    const std::string text = trim(line);
    if (text.empty()) {
      ++ds.warnings;
      continue;
    }
    ++taken;
    auto ids = tokenizer.encode(text);
    if (ids.size() > max_tokens) ids.resize(max_tokens);
    if (ids.size() < 2) {
      ++ds.warnings;
      continue;
    }
    ds.sequences.push_back(std::move(ids));
  }
  return ds;
}

std::vector<std::size_t> subset_indices(std::size_t size, std::size_t n, std::uint64_t seed) {
  if (n > size) {
    throw DataError("subset of " + std::to_string(n) + " requested from " + std::to_string(size) + " records");
  }
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = Rng::derive(seed, "subset");
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

ClassificationDataset subset(const ClassificationDataset& data, std::size_t n, std::uint64_t seed) {
  ClassificationDataset out;
  for (auto i : subset_indices(data.size(), n, seed)) out.records.push_back(data.records[i]);
  return out;
}

LMDataset subset(const LMDataset& data, std::size_t n, std::uint64_t seed) {
  LMDataset out;
  out.warnings = data.warnings;
  for (auto i : subset_indices(data.size(), n, seed)) out.sequences.push_back(data.sequences[i]);
  return out;
}

const char* to_string(Task task) { return task == Task::kClassify ? "classify" : "lm"; }

Task task_from_string(const std::string& text) {
  if (text == "classify") return Task::kClassify;
  if (text == "lm") return Task::kLm;
  throw InputError("unknown task '" + text + "' (use classify or lm)");
}

std::size_t EvalSet::examples() const {
  std::size_t n = 0;
  for (const auto& b : batches) n += b.tokens.batch;
  return n;
}

EvalSet batch(const ClassificationDataset& data, const Tokenizer& tokenizer, std::size_t batch_size,
              std::size_t max_tokens) {
  if (batch_size < 1) throw InputError("batch_size must be >= 1");
  EvalSet set{Task::kClassify, {}};
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(start + batch_size, data.size());
    std::vector<std::vector<std::int32_t>> seqs;
    EvalBatch b;
    for (std::size_t i = start; i < end; ++i) {
      auto ids = tokenizer.encode(data.records[i].text);
      if (ids.size() > max_tokens) ids.resize(max_tokens);
      if (ids.empty()) ids.push_back(tokenizer.unk_id());
      seqs.push_back(std::move(ids));
      b.labels.push_back(data.records[i].label);
    }
    b.tokens = TokenBatch::from_sequences(seqs, tokenizer.pad_id());
    set.batches.push_back(std::move(b));
  }
  return set;
}

EvalSet batch(const LMDataset& data, std::size_t batch_size, std::int32_t pad_id) {
  if (batch_size < 1) throw InputError("batch_size must be >= 1");
  EvalSet set{Task::kLm, {}};
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(start + batch_size, data.size());
    std::vector<std::vector<std::int32_t>> seqs(data.sequences.begin() + start, data.sequences.begin() + end);
    EvalBatch b;
    b.tokens = TokenBatch::from_sequences(seqs, pad_id);
    set.batches.push_back(std::move(b));
  }
  return set;
}

}  // namespace faultlab
