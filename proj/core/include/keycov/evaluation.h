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

#ifndef KEYCOV_EVALUATION_H_
#define KEYCOV_EVALUATION_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "keycov/backend.h"
#include "keycov/corpus.h"
#include "keycov/extractor.h"
#include "keycov/inventory.h"

namespace keycov {

enum class MatchMode { kEm, kBtm };

inline constexpr int64_t kDefaultDelta = 3;

struct MatchCriterion {
  MatchMode mode = MatchMode::kEm;
  int64_t delta = kDefaultDelta;  // BTM only

  static MatchCriterion Em() { return {MatchMode::kEm, 0}; }
  static MatchCriterion Btm(int64_t delta = kDefaultDelta) { return {MatchMode::kBtm, delta}; }
  void Validate() const;
};

bool EmMatch(std::string_view pred, std::string_view gold);
bool BtmMatch(const Span& pred, const Span& gold, int64_t delta);

enum class EvalLevel { kValue, kPair };

struct PrfCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  // Zero when the denominator is zero.
  double precision() const;
  double recall() const;
  double f1() const;
  PrfCounts& operator+=(const PrfCounts& o);
  friend bool operator==(const PrfCounts&, const PrfCounts&) = default;
};

struct EvalReport {
  EvalLevel level = EvalLevel::kPair;
  MatchCriterion criterion;
  PrfCounts counts;
  std::optional<double> coverage;
};

// An extracted pair tagged with the page it came from.
struct PagePrediction {
  std::string page_id;
  ExtractedPair pair;
};

// Value level: per (page, canonical key) the predicted value is matched
// against the gold values of that key on the page. Gold annotations with no
// canonical key, or whose key was not predicted, count as false negatives.
// Pairs without a value are not value predictions. Throws ValidationError for
// two value predictions on one (page, key) or a prediction for an unknown
// page.
EvalReport ValuePrf(const std::vector<PagePrediction>& predictions, const std::vector<Page>& gold,
                    const MatchCriterion& criterion);

// Pair level: a prediction matches a gold annotation iff both the surface key
// and the value match under the criterion (strings for EM, spans for BTM).
// Counts come from a maximum one-to-one matching per page. Every emitted
// pair is a prediction, including pairs with no value.
EvalReport PairPrf(const std::vector<PagePrediction>& predictions, const std::vector<Page>& gold,
                   const MatchCriterion& criterion);

// Size of a maximum matching in a bipartite graph given as adjacency lists
// from left vertices to right vertices in [0, right_size).
int64_t MaximumBipartiteMatching(const std::vector<std::vector<int>>& adjacency, int right_size);

// Extracts every page with the given view.
std::vector<PagePrediction> ExtractCorpus(const std::vector<Page>& pages, const KeyInventory& view,
                                          LogitBackend& backend, const ExtractConfig& config);

struct SweepRow {
  double fraction = 0.0;
  double coverage = 0.0;
  PrfCounts em;
  PrfCounts btm;
};

struct SweepConfig {
  std::vector<double> fractions = {10, 20, 50, 80, 90, 95, 100};
  int64_t delta = kDefaultDelta;
  CoverageMode coverage_mode = CoverageMode::kOccurrence;
  EvalLevel level = EvalLevel::kPair;
  ExtractConfig extract;
};

// For each fraction: restrict inv (frequencies should come from the training
// split) with TopFractionKeys, extract the evaluation pages, score under EM
// and BTM, and record coverage of the view. Throws ConfigError for an empty
// fraction list.
std::vector<SweepRow> CoverageSweep(const std::vector<Page>& eval_pages, const KeyInventory& inv,
                                    LogitBackend& backend, const SweepConfig& config);

// CSV header: fraction,coverage,em_p,em_r,em_f1,btm_p,btm_r,btm_f1.
std::string SweepToCsv(const std::vector<SweepRow>& rows);
nlohmann::json SweepToJson(const std::vector<SweepRow>& rows);
// Column-oriented series for plotting.
nlohmann::json SweepPlotData(const std::vector<SweepRow>& rows);

std::string_view MatchModeName(MatchMode mode);
std::optional<MatchMode> ParseMatchMode(std::string_view name);
std::string_view EvalLevelName(EvalLevel level);
std::optional<EvalLevel> ParseEvalLevel(std::string_view name);
// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double x);

nlohmann::json EvalReportToJson(const EvalReport& report);
nlohmann::json PagePredictionToJson(const PagePrediction& p);
PagePrediction PagePredictionFromJson(const nlohmann::json& j);
std::vector<PagePrediction> ParsePredictions(std::string_view jsonl);
std::vector<PagePrediction> LoadPredictions(const std::filesystem::path& path);
std::string SerializePredictions(const std::vector<PagePrediction>& predictions);

}  // namespace keycov

#endif  // KEYCOV_EVALUATION_H_
