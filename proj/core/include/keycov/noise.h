// Copyright 2026 The keycov Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Alignment-preserving OCR noise: lookalike substitutions, spurious and
// missing whitespace, spurious line breaks. Every edit is applied to the
// annotation offsets as well, so text[key_span] == surface_key keeps holding.

#ifndef KEYCOV_NOISE_H_
#define KEYCOV_NOISE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string_view>
#include <vector>

#include "keycov/corpus.h"

namespace keycov {

// Symmetric character confusion table. A character maps to every partner it
// was paired with, in insertion order.
class ConfusionTable {
 public:
  ConfusionTable() = default;

  // The table shipped in data/ocr_confusions.tsv.
  static ConfusionTable Default();
  // Tab-separated pairs, one per line; '#' starts a comment.
  static ConfusionTable Parse(std::string_view tsv);
  static ConfusionTable Load(const std::filesystem::path& path);

  void AddPair(char32_t a, char32_t b);
  const std::vector<char32_t>* Partners(char32_t c) const;
  size_t size() const { return partners_.size(); }

  friend bool operator==(const ConfusionTable&, const ConfusionTable&) = default;

 private:
  std::map<char32_t, std::vector<char32_t>> partners_;
};

// Per-character probabilities for each channel.
struct NoiseConfig {
  double substitution = 0.0;
  double whitespace_insertion = 0.0;
  double whitespace_deletion = 0.0;
  double line_break_insertion = 0.0;

  // Splits a total rate evenly over the four channels.
  static NoiseConfig Uniform(double total_rate);
  void Validate() const;
};

Page InjectOcrNoise(const Page& page, const NoiseConfig& config, uint64_t seed,
                    const ConfusionTable& table = ConfusionTable::Default());

}  // namespace keycov

#endif  // KEYCOV_NOISE_H_
