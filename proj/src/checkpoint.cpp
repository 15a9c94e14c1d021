// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "faultlab/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "json.hpp"

namespace faultlab {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

const char* to_string(CheckpointErrorKind kind) {
  switch (kind) {
    case CheckpointErrorKind::kIo: return "io error";
    case CheckpointErrorKind::kBadMagic: return "bad magic";
    case CheckpointErrorKind::kBadHeader: return "bad header";
    case CheckpointErrorKind::kTruncated: return "truncated payload";
    case CheckpointErrorKind::kOverlap: return "overlapping ranges";
    case CheckpointErrorKind::kShapeLengthMismatch: return "shape/length mismatch";
    case CheckpointErrorKind::kUnknownDtype: return "unknown dtype";
    case CheckpointErrorKind::kDuplicateName: return "duplicate tensor name";
  }
  return "checkpoint error";
}

namespace {

struct Entry {
  std::string name;
  std::string dtype;
  Shape shape;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
};

struct Header {
  ModelConfig config;
  std::vector<Entry> entries;
  std::uint64_t payload_start = 0;
};

bool valid_name(const std::string& name) {
  if (name.empty() || name.front() == '.' || name.back() == '.') return false;
  return name.find("..") == std::string::npos;
}

// Reads magic + header. Structural problems with the JSON itself throw; per-entry
// inconsistencies are left for check_entries().
Header read_header(std::ifstream& in, std::uint64_t file_size) {
  char magic[8];
  if (file_size < 16 || !in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw CheckpointError(CheckpointErrorKind::kBadMagic, "file does not start with FLCKPT01");
  }
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), 8);
  if (header_len > file_size - 16) {
    throw CheckpointError(CheckpointErrorKind::kTruncated, "header length " + std::to_string(header_len) +
                                                               " exceeds file size");
  }
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) {
    throw CheckpointError(CheckpointErrorKind::kIo, "failed to read header");
  }
  Header h;
  h.payload_start = 16 + header_len;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "faultlab.checkpoint" || j.value("version", 0) != 1) {
      throw CheckpointError(CheckpointErrorKind::kBadHeader, "unsupported format/version");
    }
    h.config = j.at("config").get<ModelConfig>();
    for (const auto& e : j.at("tensors")) {
      Entry en;
      en.name = e.at("name").get<std::string>();
      en.dtype = e.at("dtype").get<std::string>();
      en.shape = e.at("shape").get<Shape>();
      en.offset = e.at("offset").get<std::uint64_t>();
      en.length = e.at("length").get<std::uint64_t>();
      h.entries.push_back(std::move(en));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw CheckpointError(CheckpointErrorKind::kBadHeader, ex.what());
  } catch (const InputError& ex) {
    throw CheckpointError(CheckpointErrorKind::kBadHeader, ex.what());
  }
  return h;
}

std::vector<ValidationFinding> check_entries(const Header& h, std::uint64_t payload_size) {
  std::vector<ValidationFinding> out;
  std::set<std::string> seen;
  for (const auto& e : h.entries) {
    if (!valid_name(e.name)) out.push_back({CheckpointErrorKind::kBadHeader, "invalid tensor name '" + e.name + "'"});
    if (!seen.insert(e.name).second) {
      out.push_back({CheckpointErrorKind::kDuplicateName, "duplicate tensor name '" + e.name + "'"});
    }
    if (e.dtype != "f32") {
      out.push_back({CheckpointErrorKind::kUnknownDtype, "tensor '" + e.name + "' has dtype '" + e.dtype + "'"});
    }
    if (e.length != 4 * shape_numel(e.shape)) {
      out.push_back({CheckpointErrorKind::kShapeLengthMismatch,
                     "tensor '" + e.name + "' shape " + shape_to_string(e.shape) + " needs " +
                         std::to_string(4 * shape_numel(e.shape)) + " bytes, header claims " +
                         std::to_string(e.length)});
    }
    if (e.offset > payload_size || e.length > payload_size - e.offset) {
      out.push_back({CheckpointErrorKind::kTruncated, "tensor '" + e.name + "' range [" + std::to_string(e.offset) +
                                                          ", " + std::to_string(e.offset + e.length) +
                                                          ") out of bounds of " + std::to_string(payload_size) +
                                                          "-byte payload"});
    }
  }
  std::vector<const Entry*> by_offset;
  for (const auto& e : h.entries) {
    if (e.length > 0) by_offset.push_back(&e);
  }
  std::sort(by_offset.begin(), by_offset.end(), [](auto* a, auto* b) { return a->offset < b->offset; });
  for (std::size_t i = 1; i < by_offset.size(); ++i) {
    const Entry& prev = *by_offset[i - 1];
    if (by_offset[i]->offset < prev.offset + prev.length) {
      out.push_back({CheckpointErrorKind::kOverlap, "tensors '" + prev.name + "' and '" + by_offset[i]->name +
                                                        "' overlap"});
    }
  }
  return out;
}

std::uint64_t file_size_of(const std::filesystem::path& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw CheckpointError(CheckpointErrorKind::kIo, "cannot stat " + path.string() + ": " + ec.message());
  return size;
}

}  // namespace

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::uint64_t size = file_size_of(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorKind::kIo, "cannot open " + path.string());
  const Header h = read_header(in, size);
  const std::uint64_t payload_size = size - h.payload_start;
  const auto findings = check_entries(h, payload_size);
  if (!findings.empty()) throw CheckpointError(findings.front().kind, findings.front().message);

  std::vector<char> payload(payload_size);
  if (payload_size && !in.read(payload.data(), static_cast<std::streamsize>(payload_size))) {
    throw CheckpointError(CheckpointErrorKind::kTruncated, "short read of payload");
  }
  Checkpoint ck;
  ck.config = h.config;
  for (const auto& e : h.entries) {
    std::vector<float> data(shape_numel(e.shape));
    if (e.length) std::memcpy(data.data(), payload.data() + e.offset, e.length);
    ck.tensors.emplace(e.name, Tensor(e.shape, std::move(data)));
  }
  return ck;
}

void save_checkpoint(const TensorMap& tensors, const ModelConfig& config, const std::filesystem::path& path) {
  nlohmann::json entries = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    if (!valid_name(name)) throw CheckpointError(CheckpointErrorKind::kBadHeader, "invalid tensor name '" + name + "'");
    const std::uint64_t len = 4 * t.numel();
    entries.push_back({{"name", name}, {"dtype", "f32"}, {"shape", t.shape()}, {"offset", offset}, {"length", len}});
    offset += len;
  }
  const nlohmann::json header{
      {"format", "faultlab.checkpoint"}, {"version", 1}, {"config", config}, {"tensors", entries}};
  const std::string text = header.dump();
  const std::uint64_t header_len = text.size();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out.write(kCheckpointMagic, 8);
  out.write(reinterpret_cast<const char*>(&header_len), 8);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, t] : tensors) {
    out.write(reinterpret_cast<const char*>(t.raw()), static_cast<std::streamsize>(4 * t.numel()));
  }
  out.flush();
  if (!out) throw CheckpointError(CheckpointErrorKind::kIo, "write failed for " + path.string());
}

ValidationReport validate_checkpoint(const std::filesystem::path& path) {
  ValidationReport report;
  try {
    const std::uint64_t size = file_size_of(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError(CheckpointErrorKind::kIo, "cannot open " + path.string());
    const Header h = read_header(in, size);
    report.findings = check_entries(h, size - h.payload_start);
  } catch (const CheckpointError& e) {
    report.findings.push_back({e.kind(), e.what()});
  }
  return report;
}

TransformerModel load_model(const std::filesystem::path& path) {
  Checkpoint ck = load_checkpoint(path);
  return TransformerModel(ck.config, std::move(ck.tensors));
}

}  // namespace faultlab
