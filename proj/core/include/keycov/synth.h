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

// Synthetic semi-structured pages with a planted long-tail key inventory.
//
// Canonical keys are named k0001, k0002, ... by Zipf rank. Each key owns a
// geometric number of surface forms (the canonical itself plus aliases made
// by appending a header suffix). A page is a sequence of lines
// "<surface><delimiter><value>" with exact gold spans; an optional PII line
// is de-identified to "**" and OCR noise can be layered on top.

#ifndef KEYCOV_SYNTH_H_
#define KEYCOV_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "keycov/corpus.h"
#include "keycov/inventory.h"
#include "keycov/noise.h"
#include "keycov/random.h"

namespace keycov {

// Samples ranks 0..n-1 with P(r) proportional to 1/(r+1)^s.
class ZipfSampler {
 public:
  ZipfSampler(int n, double s);

  int Sample(Rng& rng) const;
  // Normalized closed-form weights.
  const std::vector<double>& probabilities() const { return probs_; }

 private:
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

struct GeneratorConfig {
  int num_keys = 300;
  // Mean number of surface forms per canonical key, canonical included.
  double surface_forms_mean = 1.8;
  int max_surface_forms = 11;
  double zipf_s = 1.05;
  int num_pages = 2000;
  int pages_per_report_min = 1;
  int pages_per_report_max = 3;
  int keys_per_page_min = 4;
  int keys_per_page_max = 12;
  int value_length_min = 2;
  int value_length_max = 24;
  // Keys whose longest possible value fits in this many characters are
  // flagged short_field.
  int short_threshold = 10;
  std::vector<std::u32string> delimiters = {U"：", U":", U": ", U"=", U" "};
  double pii_probability = 0.3;
  NoiseConfig noise;
  uint64_t seed = 17;

  // Throws ConfigError on inconsistent settings.
  void Validate() const;
};

struct SyntheticCorpus {
  std::vector<Page> pages;
  // Complete planted inventory; frequency counts every generated occurrence.
  KeyInventory inventory;
};

SyntheticCorpus GenerateSyntheticCorpus(const GeneratorConfig& config);

// Name of the canonical key at zero-based Zipf rank `rank`.
std::string SyntheticKeyName(int rank);

// Applies noise to each page with a per-page seed derived from (seed, page_id).
std::vector<Page> InjectCorpusNoise(const std::vector<Page>& pages, const NoiseConfig& noise,
                                    uint64_t seed,
                                    const ConfusionTable& table = ConfusionTable::Default());

}  // namespace keycov

#endif  // KEYCOV_SYNTH_H_
