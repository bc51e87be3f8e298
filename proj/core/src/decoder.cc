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

#include "keycov/decoder.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "keycov/errors.h"
#include "keycov/text.h"

namespace keycov {

void DecodeConfig::Validate() const {
  if (top_n <= 0) throw ConfigError("decoder: top_n must be positive");
  if (!(mass > 0.0 && mass <= 1.0)) throw ConfigError("decoder: mass must lie in (0, 1]");
  if (max_span <= 0 || short_max_span <= 0) throw ConfigError("decoder: span caps must be positive");
  if (!std::isfinite(null_offset)) throw ConfigError("decoder: null_offset must be finite");
}

bool BetterCandidate(const SpanCandidate& a, const SpanCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.start != b.start) return a.start < b.start;
  return a.end < b.end;
}

namespace {

// Indices sorted by value descending, ties by index ascending.
std::vector<int64_t> RankDescending(const std::vector<double>& v, size_t from = 0) {
  std::vector<int64_t> idx(v.size() - from);
  std::iota(idx.begin(), idx.end(), static_cast<int64_t>(from));
  std::stable_sort(idx.begin(), idx.end(), [&v](int64_t a, int64_t b) { return v[a] > v[b]; });
  return idx;
}

}  // namespace

std::vector<int64_t> DynamicAdmissibleEnds(int64_t start, const std::vector<double>& end_logits,
                                           double mass, int cap) {
  const auto len = static_cast<int64_t>(end_logits.size());
  if (start < 0 || start >= len) {
    throw ValidationError("start " + std::to_string(start) + " outside chunk of length " +
                          std::to_string(len));
  }
  const double peak = *std::max_element(end_logits.begin() + start, end_logits.end());
  std::vector<double> prob(end_logits.size(), 0.0);
  double z = 0.0;
  for (int64_t j = start; j < len; ++j) {
    prob[j] = std::exp(end_logits[j] - peak);
    z += prob[j];
  }
  std::vector<int64_t> order = RankDescending(prob, static_cast<size_t>(start));
  std::vector<int64_t> out;
  double cumulative = 0.0;
  for (int64_t j : order) {
    cumulative += prob[j] / z;
    if (j - start + 1 <= cap) out.push_back(j);
    if (cumulative >= mass - kMassTolerance) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<SpanCandidate> DecodeSpans(const ChunkLogits& logits, const DecodeConfig& config,
                                         bool short_field) {
  const size_t len = logits.start_logits.size();
  if (len == 0) return std::nullopt;
  logits.Validate(len);
  const int cap = short_field ? config.short_max_span : config.max_span;
  const size_t n = std::min<size_t>(config.top_n, len);

  std::vector<int64_t> starts = RankDescending(logits.start_logits);
  std::vector<int64_t> ends = RankDescending(logits.end_logits);
  starts.resize(n);
  ends.resize(n);

  // No candidate can beat start[top] + end[top]; skip the enumeration when
  // the null score already wins.
  const double threshold = logits.null_score + config.null_offset;
  if (threshold > logits.start_logits[starts[0]] + logits.end_logits[ends[0]]) {
    return std::nullopt;
  }

  std::optional<SpanCandidate> best;
  for (int64_t s : starts) {
    std::vector<int64_t> admissible;
    bool computed = false;
    for (int64_t e : ends) {
      if (e < s || e - s + 1 > cap) continue;
      if (!computed) {
        admissible = DynamicAdmissibleEnds(s, logits.end_logits, config.mass, cap);
        computed = true;
      }
      if (!std::binary_search(admissible.begin(), admissible.end(), e)) continue;
      SpanCandidate c{s, e + 1, logits.start_logits[s] + logits.end_logits[e]};
      if (!best || BetterCandidate(c, *best)) best = c;
    }
  }
  if (!best || threshold > best->score) return std::nullopt;
  return best;
}

namespace {

bool IsTrailingPunct(char32_t c) {
  switch (c) {
    case U'，':
    case U'。':
    case U'；':
    case U'、':
    case U'：':
    case U':':
    case U';':
    case U',':
    case U'.':
      return true;
    default:
      return false;
  }
}

bool IsAsciiAlnum(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || (c >= U'0' && c <= U'9');
}

// True if positions i-1 and i belong to the same token.
bool SameToken(std::u32string_view text, int64_t i) {
  const char32_t a = text[i - 1];
  const char32_t b = text[i];
  if (IsAsciiAlnum(a) && IsAsciiAlnum(b)) return true;
  return IsSpace(a) && IsSpace(b);
}

}  // namespace

std::optional<Span> PostprocessSpan(std::u32string_view text, const Span& span) {
  const auto len = static_cast<int64_t>(text.size());
  if (span.start < 0 || span.end > len || span.start > span.end) {
    throw ValidationError("span [" + std::to_string(span.start) + "," + std::to_string(span.end) +
                          ") outside text of length " + std::to_string(len));
  }
  int64_t s = span.start;
  int64_t e = span.end;
  for (;;) {
    const int64_t s0 = s;
    const int64_t e0 = e;
    while (s < e && IsSpace(text[s])) ++s;
    while (e > s && IsSpace(text[e - 1])) --e;
    while (e > s && IsTrailingPunct(text[e - 1])) --e;
    // A start inside a token moves to the next token start.
    while (s < e && s > 0 && SameToken(text, s)) ++s;
    // An end inside a token moves back to that token's start.
    while (e > s && e < len && SameToken(text, e)) --e;
    if (s == s0 && e == e0) break;
  }
  if (s >= e) return std::nullopt;
  return Span{s, e};
}

std::optional<SpanCandidate> MergeChunkCandidates(
    const std::vector<std::optional<SpanCandidate>>& candidates) {
  std::optional<SpanCandidate> best;
  for (const auto& c : candidates) {
    if (c && (!best || BetterCandidate(*c, *best))) best = c;
  }
  return best;
}

}  // namespace keycov
