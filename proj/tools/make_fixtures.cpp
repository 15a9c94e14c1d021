// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

// Regenerates the bundled fixtures: make_fixtures [output_dir]

#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"

#include "faultlab/checkpoint.hpp"
#include "faultlab/toy_models.hpp"

namespace fs = std::filesystem;
using namespace faultlab;

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? argv[1] : "fixtures";
  fs::create_directories(dir);

  {
    std::ofstream out(dir / "imdb_toy.jsonl", std::ios::binary);
    for (const auto& r : toy::review_fixture(200, 1).records) {
      out << nlohmann::json{{"text", r.text}, {"label", r.label}}.dump() << "\n";
    }
  }
  {
    std::ofstream out(dir / "wikitext_toy.txt", std::ios::binary);
    for (const auto& line : toy::lm_fixture_lines()) out << line << "\n";
  }
  const TransformerModel cls = toy::sentiment_classifier();
  save_checkpoint(cls.params(), cls.config(), dir / "toy_classifier_10l.fckpt");
  const TransformerModel lm = toy::random_model(toy::small_lm_config(2), 7);
  save_checkpoint(lm.params(), lm.config(), dir / "toy_lm_2l.fckpt");

  std::cout << "wrote fixtures to " << dir.string() << "\n";
  return 0;
}
