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

// Page corpora: the in-memory model, JSON Lines I/O, report-level splitting,
// key frequency profiling and de-identification.

#ifndef KEYCOV_CORPUS_H_
#define KEYCOV_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace keycov {

// Half-open [start, end) range of character (Unicode scalar) offsets.
struct Span {
  int64_t start = 0;
  int64_t end = 0;

  int64_t length() const { return end - start; }
  bool Intersects(const Span& other) const {
    return start < other.end && other.start < end;
  }
  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct KVAnnotation {
  Span key_span;
  Span value_span;
  std::string surface_key;  // UTF-8; equals text[key_span]
  std::optional<std::string> canonical_key;

  friend bool operator==(const KVAnnotation&, const KVAnnotation&) = default;
};

struct Page {
  std::string report_id;
  std::string page_id;
  std::u32string text;
  std::vector<KVAnnotation> annotations;

  // UTF-8 copy of text[span]. Span must be in range.
  std::string Slice(const Span& span) const;

  friend bool operator==(const Page&, const Page&) = default;
};

// Throws ValidationError naming the page if any annotation is out of range,
// empty, or disagrees with its surface_key.
void ValidatePage(const Page& page);

nlohmann::json PageToJson(const Page& page);
// Throws ParseError on shape errors; does not validate invariants.
Page PageFromJson(const nlohmann::json& j);

// One page per line. Blank lines are skipped. Throws ParseError naming the
// line number for malformed records, ValidationError naming the page_id for
// invariant violations and IoError if the file cannot be read.
std::vector<Page> LoadCorpus(const std::filesystem::path& path);
std::vector<Page> ParseCorpus(std::string_view jsonl);
void WriteCorpus(const std::filesystem::path& path, const std::vector<Page>& pages);
std::string SerializeCorpus(const std::vector<Page>& pages);

// ---------------------------------------------------------------------------
// Splitting

enum class SplitName { kTrain, kValidation, kTest };

struct CorpusSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  const std::vector<std::string>& Get(SplitName name) const;
  friend bool operator==(const CorpusSplit&, const CorpusSplit&) = default;
};

using SplitRatios = std::array<int, 3>;
inline constexpr SplitRatios kDefaultRatios = {7, 1, 2};

// Bucket of one report: FNV-1a 64 over the UTF-8 report id followed by the
// seed as 8 little-endian bytes, modulo the ratio sum.
SplitName AssignSplit(std::string_view report_id, uint64_t seed,
                      const SplitRatios& ratios = kDefaultRatios);

// Report ids within each split keep first-appearance order.
CorpusSplit SplitByReportHash(const std::vector<Page>& pages, uint64_t seed,
                              const SplitRatios& ratios = kDefaultRatios);

std::vector<Page> SelectSplit(const std::vector<Page>& pages,
                              const CorpusSplit& split, SplitName name);

nlohmann::json SplitToJson(const CorpusSplit& split);
CorpusSplit SplitFromJson(const nlohmann::json& j);
std::optional<SplitName> ParseSplitName(std::string_view name);

// ---------------------------------------------------------------------------
// Profiling

struct KeyFrequencyRow {
  std::string surface_key;
  int64_t count = 0;
  double cumulative_coverage = 0.0;
};

// Surface keys by descending count, ties lexicographic. Coverage at rank r is
// the share of all occurrences held by the top r keys.
std::vector<KeyFrequencyRow> KeyFrequencyProfile(const std::vector<Page>& pages);

// ---------------------------------------------------------------------------
// De-identification

inline constexpr std::u32string_view kPlaceholder = U"**";

// Replaces each selected span with the placeholder, remaps annotation offsets
// and drops annotations whose key or value span touches a selected span.
// Selectors may be given in any order; overlapping selectors throw
// ValidationError.
Page Deidentify(const Page& page, std::vector<Span> selectors);

}  // namespace keycov

#endif  // KEYCOV_CORPUS_H_
