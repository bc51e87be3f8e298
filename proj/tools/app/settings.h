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

// Application settings read from a sectioned key = value file and
// overridden by command-line flags.
//
//   [corpus]        path, num_keys, num_pages, surface_forms_mean, zipf_s, ...
//   [noise]         total or substitution / whitespace_insertion / ...
//   [split]         seed, ratios
//   [inventory]     path, coverage_mode
//   [canonicalizer] threshold, embedding_file, embedding_buckets
//   [extractor]     budget, overlap, chunking, top_n, mass, max_span, ...
//   [evaluation]    delta, fractions, level
//   [loss]          task, epsilon, margin, ..., instances, max_len
//   [service]       host, port, store_dir, static_dir
//   [loop]          auto_accept, refresh_command, coverage_mode, ...

#ifndef KEYCOV_TOOLS_SETTINGS_H_
#define KEYCOV_TOOLS_SETTINGS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "keycov/corpus.h"
#include "keycov/evaluation.h"
#include "keycov/extractor.h"
#include "keycov/inventory.h"
#include "keycov/loop.h"
#include "keycov/loss.h"
#include "keycov/synth.h"

namespace keycov {

struct Settings {
  uint64_t seed = 17;

  std::string corpus_path;
  std::string confusions_path;
  GeneratorConfig generator;

  SplitRatios split_ratios = kDefaultRatios;

  std::string inventory_path;
  CoverageMode coverage_mode = CoverageMode::kOccurrence;

  double cluster_threshold = kDefaultClusterThreshold;
  std::string embedding_file;
  int embedding_buckets = 256;

  ExtractConfig extract;
  std::string backend = "rule";  // rule | external
  std::string backend_command;

  int64_t delta = kDefaultDelta;
  std::vector<double> fractions = {10, 20, 50, 80, 90, 95, 100};
  EvalLevel level = EvalLevel::kPair;

  LossConfig loss;
  int loss_instances = 100;
  int loss_max_len = 32;

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store_dir;
  std::string static_dir;

  LoopConfig loop;

  // Applies one "section.key" = value setting. Throws ConfigError for an
  // unknown key or a malformed value.
  void Set(const std::string& section, const std::string& key, const std::string& value);
  void Validate() const;
};

// Reads an INI-style file into settings (starting from defaults). Throws
// IoError if unreadable, ConfigError on unknown keys or bad values.
Settings LoadSettings(const std::filesystem::path& path);
void ApplySettingsFile(const std::filesystem::path& path, Settings& settings);

std::vector<double> ParseDoubleList(const std::string& text);

}  // namespace keycov

#endif  // KEYCOV_TOOLS_SETTINGS_H_
