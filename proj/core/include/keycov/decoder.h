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

// Span decoding from start/end logits, span clean-up and cross-chunk
// selection.

#ifndef KEYCOV_DECODER_H_
#define KEYCOV_DECODER_H_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "keycov/backend.h"
#include "keycov/corpus.h"

namespace keycov {

struct DecodeConfig {
  int top_n = 20;
  double mass = 0.9;
  int max_span = 64;
  int short_max_span = 16;
  double null_offset = 0.0;

  void Validate() const;
};

// [start, end) in chunk-local (or, after merging, global) offsets.
struct SpanCandidate {
  int64_t start = 0;
  int64_t end = 0;
  double score = 0.0;
  friend bool operator==(const SpanCandidate&, const SpanCandidate&) = default;
};

// Tolerance used when comparing a cumulative probability against the mass
// threshold, so that e.g. nine of ten uniform positions reach 0.9.
inline constexpr double kMassTolerance = 1e-12;

// Inclusive end indices admissible for a span starting at start: softmax of
// end_logits over positions >= start, positions sorted by probability
// (descending, then index), the shortest prefix whose cumulative mass reaches
// mass, restricted to spans of at most cap characters. Returned ascending.
// Throws ValidationError if start is outside the logits.
std::vector<int64_t> DynamicAdmissibleEnds(int64_t start, const std::vector<double>& end_logits,
                                           double mass, int cap);

// Best admissible span among the top-N starts x top-N ends (by logit, ties to
// the lower index), scored by start + end logit. Ties go to the earlier start,
// then the shorter span. Returns nullopt (no answer) when the chunk is empty,
// when no candidate survives, or when null_score + null_offset exceeds the
// best score.
std::optional<SpanCandidate> DecodeSpans(const ChunkLogits& logits, const DecodeConfig& config,
                                         bool short_field);

// Trims whitespace, strips trailing {，。；、：:;,.} and shrinks the span
// inward to token boundaries, repeating until nothing changes. Tokens are
// single Han characters, runs of ASCII letters and digits, runs of
// whitespace, and single punctuation or other characters. Returns nullopt if
// nothing is left. Throws ValidationError for a span outside the text.
std::optional<Span> PostprocessSpan(std::u32string_view text, const Span& span);

// Highest score wins; ties go to the earlier start, then the shorter span.
// nullopt only if every candidate is nullopt.
std::optional<SpanCandidate> MergeChunkCandidates(
    const std::vector<std::optional<SpanCandidate>>& candidates);

// True if a is preferred over b under the score / start / length order.
bool BetterCandidate(const SpanCandidate& a, const SpanCandidate& b);

}  // namespace keycov

#endif  // KEYCOV_DECODER_H_
