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

#ifndef KEYCOV_EXTRACTOR_H_
#define KEYCOV_EXTRACTOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "keycov/backend.h"
#include "keycov/chunk.h"
#include "keycov/corpus.h"
#include "keycov/decoder.h"
#include "keycov/inventory.h"
#include "keycov/query.h"

namespace keycov {

struct ExtractConfig {
  int64_t budget = 448;
  int64_t overlap = 64;
  // When false the whole page is a single chunk.
  bool chunking = true;
  int max_aliases = 3;
  bool include_aliases = true;
  QueryLanguage language = QueryLanguage::kEnglish;
  DecodeConfig decode;

  void Validate() const;
};

struct ExtractedPair {
  std::string canonical_key;
  std::optional<std::string> surface_key;
  std::optional<Span> key_span;
  std::optional<Span> value_span;
  std::optional<std::string> value;
  double score = 0.0;
  friend bool operator==(const ExtractedPair&, const ExtractedPair&) = default;
};

// Runs one query over every chunk and returns the cleaned, merged global
// span, or nullopt.
std::optional<SpanCandidate> RunQuery(std::u32string_view text, const std::vector<Chunk>& chunks,
                                      const ExtractionQuery& query, LogitBackend& backend,
                                      const DecodeConfig& decode, bool short_field);

// For every canonical key of view (in entry order) runs the value and key
// queries; a pair is emitted iff the key query finds a header. score is the
// value span score when a value was found, else the key span score. Backend
// failures are rethrown as BackendError naming the key and chunk.
std::vector<ExtractedPair> ExtractPage(std::u32string_view text, const KeyInventory& view,
                                       LogitBackend& backend, const ExtractConfig& config);

nlohmann::json ExtractedPairToJson(const ExtractedPair& pair);
ExtractedPair ExtractedPairFromJson(const nlohmann::json& j);

}  // namespace keycov

#endif  // KEYCOV_EXTRACTOR_H_
