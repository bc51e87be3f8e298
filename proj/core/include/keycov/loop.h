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

// One iteration of the expansion loop: extract with the current inventory,
// collect observed surface keys, propose clusters for the novel ones, apply
// decisions (automatically in headless mode), persist and refresh.

#ifndef KEYCOV_LOOP_H_
#define KEYCOV_LOOP_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "keycov/backend.h"
#include "keycov/canonicalizer.h"
#include "keycov/corpus.h"
#include "keycov/embedding.h"
#include "keycov/evaluation.h"
#include "keycov/extractor.h"
#include "keycov/store.h"

namespace keycov {

struct LoopConfig {
  ExtractConfig extract;
  double cluster_threshold = kDefaultClusterThreshold;
  bool auto_accept = false;
  // Also treat gold annotation headers of the batch as observed keys. The
  // rule backend can only find headers it already knows, so without this a
  // rule-backed loop never sees a novel key.
  bool observe_gold_keys = true;
  CoverageMode coverage_mode = CoverageMode::kSurface;
  // Shell command run after the inventory changes, with the snapshot path
  // appended as its last argument. Empty disables the hook.
  std::string refresh_command;
  int snippets_per_key = 3;
  int snippet_radius = 12;
};

struct BatchIterationRecord {
  std::string batch_id;
  int64_t pages_processed = 0;
  int64_t extracted_pairs = 0;
  std::vector<std::string> novel_keys;
  int64_t proposals_created = 0;
  std::vector<std::string> proposal_ids;
  int64_t decisions_applied = 0;
  int64_t decisions_skipped = 0;  // auto-accept hit a conflict
  int64_t inventory_version_before = 0;
  int64_t inventory_version_after = 0;
  std::optional<double> coverage_before;  // absent when eval pages hold no gold pairs
  std::optional<double> coverage_after;
  bool refreshed = false;
};

struct BatchResult {
  BatchIterationRecord record;
  std::vector<PagePrediction> pairs;
};

// eval_pages defaults to the batch itself. Holds store.batch_mutex() for
// the whole iteration. Throws IoError if persistence fails; already
// committed decisions stay committed, uncommitted ones are not applied.
BatchResult RunBatchIteration(const std::string& batch_id, const std::vector<Page>& batch,
                              InventoryStore& store, LogitBackend& backend,
                              const EmbeddingProvider& provider, const LoopConfig& config,
                              const std::vector<Page>* eval_pages = nullptr);

nlohmann::json BatchRecordToJson(const BatchIterationRecord& record);

}  // namespace keycov

#endif  // KEYCOV_LOOP_H_
