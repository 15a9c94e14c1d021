// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "faultlab/tokenizer.hpp"

#include <array>
#include <fstream>
#include <limits>
#include <sstream>

#include "faultlab/error.hpp"

namespace faultlab {

namespace {

std::string utf8(std::uint32_t cp) {
  std::string s;
  if (cp < 0x80) {
    s.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    s.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    s.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return s;
}

std::array<std::string, 256> build_byte_symbols() {
  std::array<std::string, 256> table;
  std::array<bool, 256> printable{};
  for (int b = '!'; b <= '~'; ++b) printable[b] = true;
  for (int b = 0xA1; b <= 0xAC; ++b) printable[b] = true;
  for (int b = 0xAE; b <= 0xFF; ++b) printable[b] = true;
  std::uint32_t extra = 0;
  for (int b = 0; b < 256; ++b) table[b] = utf8(printable[b] ? static_cast<std::uint32_t>(b) : 256 + extra++);
  return table;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

}  // namespace

const std::string& byte_symbol(unsigned char byte) {
  static const auto table = build_byte_symbols();
  return table[byte];
}

Tokenizer Tokenizer::byte_level() { return Tokenizer(); }

Tokenizer Tokenizer::bpe(std::unordered_map<std::string, std::int32_t> vocab,
                         std::vector<std::pair<std::string, std::string>> merges) {
  Tokenizer t;
  t.mode_ = TokenizerMode::kBpe;
  std::int32_t max_id = -1;
  std::unordered_map<std::int32_t, std::string> by_id;
  for (const auto& [tok, id] : vocab) {
    if (id < 0) throw DataError("bpe vocab: negative id for '" + tok + "'");
    if (!by_id.emplace(id, tok).second) throw DataError("bpe vocab: id " + std::to_string(id) + " used twice");
    max_id = std::max(max_id, id);
  }
  for (std::size_t r = 0; r < merges.size(); ++r) {
    if (!t.ranks_.emplace(merges[r], r).second) {
      throw DataError("bpe merges: duplicate pair '" + merges[r].first + " " + merges[r].second + "'", r + 1);
    }
  }
  auto lookup = [&](std::initializer_list<const char*> names, std::int32_t fallback) {
    for (const char* n : names) {
      auto it = vocab.find(n);
      if (it != vocab.end()) return it->second;
    }
    return fallback;
  };
  t.unk_id_ = lookup({"<unk>", "<|endoftext|>"}, 0);
  t.pad_id_ = lookup({"<pad>"}, t.unk_id_);
  t.vocab_size_ = static_cast<std::size_t>(max_id + 1);
  t.vocab_ = std::move(vocab);
  return t;
}

Tokenizer Tokenizer::load_bpe(const std::filesystem::path& vocab_path, const std::filesystem::path& merges_path) {
  std::ifstream vin(vocab_path);
  if (!vin) throw DataError("cannot open bpe vocab " + vocab_path.string());
  std::unordered_map<std::string, std::int32_t> vocab;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(vin, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto sp = line.rfind(' ');
    if (sp == std::string::npos || sp == 0) throw DataError("bpe vocab: expected '<token> <id>'", lineno);
    try {
      std::size_t used = 0;
      const int id = std::stoi(line.substr(sp + 1), &used);
      if (used != line.size() - sp - 1) throw std::invalid_argument("trailing");
      if (!vocab.emplace(line.substr(0, sp), id).second) throw DataError("bpe vocab: duplicate token", lineno);
    } catch (const std::logic_error&) {
      throw DataError("bpe vocab: bad id", lineno);
    }
  }
  std::ifstream min(merges_path);
  if (!min) throw DataError("cannot open bpe merges " + merges_path.string());
  std::vector<std::pair<std::string, std::string>> merges;
  lineno = 0;
  while (std::getline(min, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a >> b) || (ss >> extra)) throw DataError("bpe merges: expected '<left> <right>'", lineno);
    merges.emplace_back(a, b);
  }
  return bpe(std::move(vocab), std::move(merges));
}

std::vector<std::string> Tokenizer::bpe_piece(std::string_view piece) const {
  std::vector<std::string> symbols;
  for (unsigned char c : piece) symbols.push_back(byte_symbol(c));
  for (;;) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    std::pair<std::string, std::string> best;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = ranks_.find({symbols[i], symbols[i + 1]});
      if (it != ranks_.end() && it->second < best_rank) {
        best_rank = it->second;
        best = it->first;
      }
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;
    std::vector<std::string> next;
    for (std::size_t i = 0; i < symbols.size();) {
      if (i + 1 < symbols.size() && symbols[i] == best.first && symbols[i + 1] == best.second) {
        next.push_back(symbols[i] + symbols[i + 1]);
        i += 2;
      } else {
        next.push_back(symbols[i]);
        ++i;
      }
    }
    symbols = std::move(next);
  }
  return symbols;
}

std::vector<std::int32_t> Tokenizer::encode(std::string_view text) const {
  std::vector<std::int32_t> ids;
  if (mode_ == TokenizerMode::kByte) {
    for (unsigned char c : text) ids.push_back(static_cast<std::int32_t>(c) + kByteOffset);
    return ids;
  }
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t start = i;
    if (text[i] == ' ' && i + 1 < text.size() && !is_space(text[i + 1])) {
      ++i;
    } else if (is_space(text[i])) {
      ++i;
      for (const auto& s : bpe_piece(text.substr(start, 1))) {
        auto it = vocab_.find(s);
        ids.push_back(it == vocab_.end() ? unk_id_ : it->second);
      }
      continue;
    }
    while (i < text.size() && !is_space(text[i])) ++i;
    for (const auto& s : bpe_piece(text.substr(start, i - start))) {
      auto it = vocab_.find(s);
      ids.push_back(it == vocab_.end() ? unk_id_ : it->second);
    }
  }
  return ids;
}

}  // namespace faultlab
