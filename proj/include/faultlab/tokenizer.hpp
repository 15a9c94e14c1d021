// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace faultlab {

enum class TokenizerMode { kByte, kBpe };

/// Byte-level tokenizer (default, no assets) or byte-level BPE.
///
/// Byte mode: id = byte + 2, with pad = 0 and unk = 1, vocabulary 258.
///
/// BPE mode: text is pre-split into pieces of one optional leading space plus
/// a run of non-space bytes (other whitespace bytes become single pieces);
/// each piece's bytes are mapped to the GPT-2 printable-unicode alphabet and
/// merged greedily by lowest merge rank until no ranked pair remains.
/// Symbols absent from the vocabulary map to unk.
class Tokenizer {
 public:
  static constexpr std::int32_t kBytePad = 0;
  static constexpr std::int32_t kByteUnk = 1;
  static constexpr std::int32_t kByteOffset = 2;

  static Tokenizer byte_level();
  /// Throws DataError for duplicate merges or vocabulary ids.
  static Tokenizer bpe(std::unordered_map<std::string, std::int32_t> vocab,
                       std::vector<std::pair<std::string, std::string>> merges);
  /// Vocab file: one `<token> <id>` per line. Merges file: one `<left> <right>`
  /// per line, in rank order; lines starting with '#' are skipped.
  static Tokenizer load_bpe(const std::filesystem::path& vocab_path, const std::filesystem::path& merges_path);

  std::vector<std::int32_t> encode(std::string_view text) const;

  TokenizerMode mode() const { return mode_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::int32_t pad_id() const { return pad_id_; }
  std::int32_t unk_id() const { return unk_id_; }

 private:
  Tokenizer() = default;
  std::vector<std::string> bpe_piece(std::string_view piece) const;

  TokenizerMode mode_ = TokenizerMode::kByte;
  std::size_t vocab_size_ = 258;
  std::int32_t pad_id_ = kBytePad;
  std::int32_t unk_id_ = kByteUnk;
  std::unordered_map<std::string, std::int32_t> vocab_;
  std::map<std::pair<std::string, std::string>, std::size_t> ranks_;
};

/// GPT-2 byte -> printable unicode symbol (UTF-8 encoded).
const std::string& byte_symbol(unsigned char byte);

}  // namespace faultlab
